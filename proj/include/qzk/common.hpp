// Shared error taxonomy, bit-string helpers and seeded randomness used by
// every component of the lab.

#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace qzk {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionError : Error { using Error::Error; };
struct PostprocessError : Error { using Error::Error; };
struct NonTermination : Error { using Error::Error; };
struct InvalidEffect : Error { using Error::Error; };
struct ImpossibleBranch : Error { using Error::Error; };
struct BasisNotOrthonormal : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };
struct FrameError : Error { using Error::Error; };
struct ProtocolError : Error { using Error::Error; };
struct SessionAborted : Error { using Error::Error; };
struct ModeError : Error { using Error::Error; };
struct StatError : Error { using Error::Error; };
struct BudgetError : Error { using Error::Error; };

// Bit strings are kept unpacked (one byte per bit, values 0/1). Everything in
// this project is desk-scale; clarity wins over packing.
using Bits = std::vector<uint8_t>;

using Rng = std::mt19937_64;

inline Bits random_bits(size_t n, Rng& rng) {
    Bits out(n);
    for (auto& b : out) b = static_cast<uint8_t>(rng() & 1u);
    return out;
}

inline Bits xor_bits(const Bits& a, const Bits& b) {
    if (a.size() != b.size()) throw FormatError("xor_bits: length mismatch");
    Bits out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
    return out;
}

inline bool is_zero(const Bits& a) {
    for (uint8_t b : a)
        if (b) return false;
    return true;
}

// Little-endian bit order within each byte, matching the file formats.
inline std::vector<uint8_t> pack_bits(const Bits& bits) {
    std::vector<uint8_t> out((bits.size() + 7) / 8, 0);
    for (size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) out[i / 8] |= static_cast<uint8_t>(1u << (i % 8));
    return out;
}

inline Bits unpack_bits(const std::vector<uint8_t>& bytes, size_t nbits) {
    if (bytes.size() * 8 < nbits) throw FormatError("unpack_bits: short buffer");
    Bits out(nbits);
    for (size_t i = 0; i < nbits; ++i)
        out[i] = (bytes[i / 8] >> (i % 8)) & 1u;
    return out;
}

inline uint64_t bits_to_uint(const Bits& bits) {
    if (bits.size() > 64) throw FormatError("bits_to_uint: too long");
    uint64_t v = 0;
    for (size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) v |= (uint64_t{1} << i);
    return v;
}

inline Bits uint_to_bits(uint64_t v, size_t nbits) {
    Bits out(nbits);
    for (size_t i = 0; i < nbits; ++i) out[i] = (v >> i) & 1u;
    return out;
}

std::string to_hex(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> from_hex(const std::string& hex);

inline std::string bits_to_hex(const Bits& bits) { return to_hex(pack_bits(bits)); }

inline Bits hex_to_bits(const std::string& hex, size_t nbits) {
    return unpack_bits(from_hex(hex), nbits);
}

// Derives an independent stream for a trial index so experiments can run
// trials in any order (or in parallel) and stay reproducible.
inline Rng derived_rng(uint64_t seed, uint64_t index) {
    std::seed_seq seq{seed, index, uint64_t{0x9e3779b97f4a7c15}};
    return Rng(seq);
}

}  // namespace qzk
