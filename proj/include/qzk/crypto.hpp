// Toy-parameterized classical primitives: a small keyed ARX permutation in
// counter mode standing in for a PRG, Naor-style statistically binding bit
// commitments with message recovery, symmetric encryption, and a keyed tag.
// Heuristic strength only; binding is the one property verified exhaustively.

#pragma once

#include <optional>
#include <vector>

#include "qzk/common.hpp"

namespace qzk {

struct ReceiverMsg {
    Bits r;  // exactly 3*lambda bits
};

struct Commitment {
    Bits c;  // 3*lambda bits per committed bit, concatenated
};

struct Opening {
    Bits message;
    std::vector<Bits> seeds;  // lambda bits per committed bit
};

struct SymKey {
    Bits key;  // lambda bits
};
struct TagKey {
    Bits key;  // lambda bits
};

ReceiverMsg sample_receiver_msg(int lambda, Rng& rng);
SymKey sample_sym_key(int lambda, Rng& rng);
TagKey sample_tag_key(int lambda, Rng& rng);

// Counter-mode expansion of a lambda-bit seed; deterministic.
Bits prg_expand(const Bits& seed, size_t out_len);

Commitment commit_bit(const ReceiverMsg& rmsg, int bit, const Bits& seed);
// Bitwise commitment to a string: one seed per message bit.
Commitment commit_string(const ReceiverMsg& rmsg, const Bits& message,
                         const std::vector<Bits>& seeds);

bool verify_open(const ReceiverMsg& rmsg, const Commitment& c, const Opening& opening);

// Message recovery: the committed string from the committer's randomness
// alone, or nullopt when any block matches neither branch.
std::optional<Bits> recover_message(const ReceiverMsg& rmsg, const Commitment& c,
                                    const std::vector<Bits>& seeds);

// Derives the per-bit commitment seeds for a string commitment deterministically
// from a single lambda-bit seed (used where the protocol reuses randomness r*).
std::vector<Bits> derive_seeds(const Bits& master, size_t count);

std::vector<uint8_t> enc(const SymKey& k, const std::vector<uint8_t>& m, Rng& rng);
std::vector<uint8_t> dec(const SymKey& k, const std::vector<uint8_t>& ct);

Bits tag(const TagKey& k, const std::vector<uint8_t>& m);
bool tag_verify(const TagKey& k, const std::vector<uint8_t>& m, const Bits& t);

// Key files: "KEY1" header followed by the packed key bits.
std::vector<uint8_t> serialize_key(const Bits& key);
Bits deserialize_key(const std::vector<uint8_t>& bytes, int lambda);

// Parameters of the ARX permutation, shared with the circuit mirror in the
// WI layer so both compute the identical function.
namespace prg_detail {
struct ArxSpec {
    static constexpr int kRounds = 8;
    uint64_t rc[kRounds];
    int rot[kRounds];
    int ks_rot;        // key-schedule rotation
    int mix_rot;       // rotation of ks xored into the state
    uint64_t ks_init;  // xored into the key before the schedule
    uint64_t len_mult; // domain separation multiplier on the seed length
};
const ArxSpec& arx_spec();
uint64_t arx_block(uint64_t key, uint64_t counter);
uint64_t seed_key_value(const Bits& seed);
}  // namespace prg_detail

// Brute-force PRG inversion at toy lambda: all seeds whose expansion to
// 3*lambda bits equals the block. Backs the message-recovery-based trapdoor
// decision in the WI phase.
class PrgDictionary {
public:
    explicit PrgDictionary(int lambda);
    std::vector<Bits> seeds_for(const Bits& block) const;
    int lambda() const { return lambda_; }

    // Shared per-lambda instance (built once, read-only afterwards).
    static const PrgDictionary& instance(int lambda);

private:
    int lambda_;
    std::vector<std::pair<uint64_t, uint32_t>> sorted_;  // (expansion, seed)
};

}  // namespace qzk
