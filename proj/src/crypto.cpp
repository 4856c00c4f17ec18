#include "qzk/crypto.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <mutex>

namespace qzk {

namespace prg_detail {

const ArxSpec& arx_spec() {
    static const ArxSpec spec = {
        {0x243f6a8885a308d3ull, 0x13198a2e03707344ull, 0xa4093822299f31d0ull,
         0x082efa98ec4e6c89ull, 0x452821e638d01377ull, 0xbe5466cf34e90c6cull,
         0xc0ac29b7c97c50ddull, 0x3f84d5b5b5470917ull},
        {13, 29, 7, 41, 19, 53, 31, 11},
        9,
        23,
        0x9e3779b97f4a7c15ull,
        0xd1342543de82ef95ull};
    return spec;
}

namespace {
inline uint64_t rotl64(uint64_t v, int r) { return (v << r) | (v >> (64 - r)); }
}  // namespace

// One 64-bit block of the keyed ARX permutation. Every step is bijective in
// v, so counter -> block is a permutation for each key.
uint64_t arx_block(uint64_t key, uint64_t counter) {
    const ArxSpec& s = arx_spec();
    uint64_t ks = key ^ s.ks_init;
    uint64_t v = counter;
    for (int r = 0; r < ArxSpec::kRounds; ++r) {
        ks = rotl64(ks, s.ks_rot) + s.rc[r];
        v += ks;
        v = rotl64(v, s.rot[r]);
        v ^= rotl64(ks, s.mix_rot);
    }
    return v;
}

uint64_t seed_key_value(const Bits& seed) {
    // Domain-separate by seed length so different lambdas use distinct keys.
    return bits_to_uint(seed) ^ (static_cast<uint64_t>(seed.size()) * arx_spec().len_mult);
}

}  // namespace prg_detail

namespace {

using prg_detail::arx_block;
using prg_detail::seed_key_value;

inline uint64_t rotl64(uint64_t v, int r) { return (v << r) | (v >> (64 - r)); }

uint64_t seed_key(const Bits& seed) { return seed_key_value(seed); }

void expand_into(uint64_t key, size_t out_len, Bits& out) {
    out.resize(out_len);
    uint64_t block = 0;
    for (size_t j = 0; j < out_len; ++j) {
        if (j % 64 == 0) block = arx_block(key, j / 64);
        out[j] = (block >> (j % 64)) & 1u;
    }
}

}  // namespace

ReceiverMsg sample_receiver_msg(int lambda, Rng& rng) {
    return ReceiverMsg{random_bits(3 * static_cast<size_t>(lambda), rng)};
}

SymKey sample_sym_key(int lambda, Rng& rng) { return SymKey{random_bits(lambda, rng)}; }
TagKey sample_tag_key(int lambda, Rng& rng) { return TagKey{random_bits(lambda, rng)}; }

Bits prg_expand(const Bits& seed, size_t out_len) {
    if (out_len > (size_t{1} << 20)) throw ConfigError("prg_expand: output too long");
    Bits out;
    expand_into(seed_key(seed), out_len, out);
    return out;
}

Commitment commit_bit(const ReceiverMsg& rmsg, int bit, const Bits& seed) {
    const size_t block = rmsg.r.size();
    if (block == 0 || block % 3 != 0) throw FormatError("receiver message must be 3*lambda bits");
    Bits c = prg_expand(seed, block);
    if (bit) c = xor_bits(c, rmsg.r);
    return Commitment{std::move(c)};
}

Commitment commit_string(const ReceiverMsg& rmsg, const Bits& message,
                         const std::vector<Bits>& seeds) {
    if (seeds.size() != message.size()) throw FormatError("one seed per message bit required");
    Commitment out;
    out.c.reserve(message.size() * rmsg.r.size());
    for (size_t i = 0; i < message.size(); ++i) {
        Commitment block = commit_bit(rmsg, message[i], seeds[i]);
        out.c.insert(out.c.end(), block.c.begin(), block.c.end());
    }
    return out;
}

bool verify_open(const ReceiverMsg& rmsg, const Commitment& c, const Opening& opening) {
    const size_t block = rmsg.r.size();
    if (block == 0 || c.c.size() % block != 0) throw FormatError("commitment length mismatch");
    if (c.c.size() / block != opening.message.size()) throw FormatError("opening message length mismatch");
    if (opening.seeds.size() != opening.message.size()) throw FormatError("opening seed count mismatch");
    Commitment redo = commit_string(rmsg, opening.message, opening.seeds);
    return redo.c == c.c;
}

std::optional<Bits> recover_message(const ReceiverMsg& rmsg, const Commitment& c,
                                    const std::vector<Bits>& seeds) {
    const size_t block = rmsg.r.size();
    if (block == 0 || c.c.size() % block != 0) throw FormatError("commitment length mismatch");
    const size_t bits = c.c.size() / block;
    if (seeds.size() != bits) throw FormatError("seed count mismatch");
    Bits message(bits);
    for (size_t i = 0; i < bits; ++i) {
        Bits expect = prg_expand(seeds[i], block);
        bool zero = true, one = true;
        for (size_t j = 0; j < block; ++j) {
            const uint8_t have = c.c[i * block + j];
            if (have != expect[j]) zero = false;
            if (have != (expect[j] ^ rmsg.r[j])) one = false;
        }
        if (zero)
            message[i] = 0;
        else if (one)
            message[i] = 1;
        else
            return std::nullopt;
    }
    return message;
}

std::vector<Bits> derive_seeds(const Bits& master, size_t count) {
    const size_t lambda = master.size();
    Bits stream = prg_expand(master, count * lambda);
    std::vector<Bits> seeds(count);
    for (size_t i = 0; i < count; ++i)
        seeds[i] = Bits(stream.begin() + i * lambda, stream.begin() + (i + 1) * lambda);
    return seeds;
}

std::vector<uint8_t> enc(const SymKey& k, const std::vector<uint8_t>& m, Rng& rng) {
    uint64_t nonce = rng();
    std::vector<uint8_t> out(8 + m.size());
    for (int i = 0; i < 8; ++i) out[i] = static_cast<uint8_t>((nonce >> (8 * i)) & 0xff);
    const uint64_t stream_key = seed_key(k.key) ^ rotl64(nonce, 17);
    uint64_t block = 0;
    for (size_t i = 0; i < m.size(); ++i) {
        if (i % 8 == 0) block = arx_block(stream_key, i / 8);
        out[8 + i] = m[i] ^ static_cast<uint8_t>((block >> (8 * (i % 8))) & 0xff);
    }
    return out;
}

std::vector<uint8_t> dec(const SymKey& k, const std::vector<uint8_t>& ct) {
    if (ct.size() < 8) throw FormatError("ciphertext shorter than nonce");
    uint64_t nonce = 0;
    for (int i = 0; i < 8; ++i) nonce |= static_cast<uint64_t>(ct[i]) << (8 * i);
    const uint64_t stream_key = seed_key(k.key) ^ rotl64(nonce, 17);
    std::vector<uint8_t> out(ct.size() - 8);
    uint64_t block = 0;
    for (size_t i = 0; i < out.size(); ++i) {
        if (i % 8 == 0) block = arx_block(stream_key, i / 8);
        out[i] = ct[8 + i] ^ static_cast<uint8_t>((block >> (8 * (i % 8))) & 0xff);
    }
    return out;
}

Bits tag(const TagKey& k, const std::vector<uint8_t>& m) {
    const uint64_t key = seed_key(k.key) ^ 0x5851f42d4c957f2dull;
    uint64_t h = arx_block(key, 0x746167ull ^ (static_cast<uint64_t>(m.size()) << 24));
    for (size_t i = 0; i < m.size(); ++i) h = arx_block(key + i + 1, h ^ m[i]);
    const size_t bits = 2 * k.key.size();
    Bits out(bits);
    uint64_t lo = arx_block(key, h), hi = arx_block(key ^ 0xffffffffull, h);
    for (size_t j = 0; j < bits; ++j) {
        uint64_t word = (j < 64) ? lo : hi;
        out[j] = (word >> (j % 64)) & 1u;
    }
    return out;
}

bool tag_verify(const TagKey& k, const std::vector<uint8_t>& m, const Bits& t) {
    return tag(k, m) == t;
}

std::vector<uint8_t> serialize_key(const Bits& key) {
    std::vector<uint8_t> out{'K', 'E', 'Y', '1'};
    auto packed = pack_bits(key);
    out.push_back(static_cast<uint8_t>(key.size()));
    out.insert(out.end(), packed.begin(), packed.end());
    return out;
}

Bits deserialize_key(const std::vector<uint8_t>& bytes, int lambda) {
    if (bytes.size() < 5 || std::memcmp(bytes.data(), "KEY1", 4) != 0)
        throw FormatError("bad KEY1 header");
    if (bytes[4] != static_cast<uint8_t>(lambda)) throw FormatError("key length mismatch");
    return unpack_bits(std::vector<uint8_t>(bytes.begin() + 5, bytes.end()), lambda);
}

PrgDictionary::PrgDictionary(int lambda) : lambda_(lambda) {
    if (lambda < 1 || lambda > 21) throw ConfigError("PrgDictionary: lambda out of range");
    const size_t block = 3 * static_cast<size_t>(lambda);
    sorted_.reserve(size_t{1} << lambda);
    for (uint32_t s = 0; s < (uint32_t{1} << lambda); ++s) {
        Bits seed = uint_to_bits(s, lambda);
        sorted_.emplace_back(bits_to_uint(prg_expand(seed, block)), s);
    }
    std::sort(sorted_.begin(), sorted_.end());
}

std::vector<Bits> PrgDictionary::seeds_for(const Bits& block) const {
    if (block.size() != 3 * static_cast<size_t>(lambda_))
        throw FormatError("PrgDictionary: wrong block length");
    const uint64_t key = bits_to_uint(block);
    std::vector<Bits> out;
    auto it = std::lower_bound(sorted_.begin(), sorted_.end(),
                               std::make_pair(key, uint32_t{0}));
    for (; it != sorted_.end() && it->first == key; ++it)
        out.push_back(uint_to_bits(it->second, lambda_));
    return out;
}

const PrgDictionary& PrgDictionary::instance(int lambda) {
    static std::mutex mu;
    static std::map<int, PrgDictionary> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(lambda);
    if (it == cache.end()) it = cache.emplace(lambda, PrgDictionary(lambda)).first;
    return it->second;
}

}  // namespace qzk
