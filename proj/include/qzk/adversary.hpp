// The adversary zoo (malicious verifiers and provers) and the impossibility
// apparatus: the contrived verifier built from subspace states with encrypted
// and tagged internal state, query classification into the structure-lemma
// events, probe policies, and the extracted prover demo.

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qzk/protocol.hpp"
#include "qzk/simulator.hpp"
#include "qzk/subspace.hpp"

namespace qzk {

// ---------------------------------------------------------------------------
// Malicious verifier zoo.

struct ZooVerifier {
    WrappedVerifierSpec spec;
    std::string note;  // what the entry exercises
};

std::vector<ZooVerifier> build_zoo(int quantum_width = 3);

// ---------------------------------------------------------------------------
// Malicious provers against the honest verifier.

// Commits a uniformly random (i, g) pair as c**; wins the trapdoor branch only
// when g matches alpha_{i,0} xor alpha_{i,1}.
Verdict run_guessing_prover(const Graph& x, const ProtocolParams& params, Rng& rng);

// Splices verifier commitment blocks into c**; the openings cannot line up
// with the committed r*, so the trapdoor branch stays unsatisfied.
Verdict run_mauling_prover(const Graph& x, const ProtocolParams& params, Rng& rng);

// ---------------------------------------------------------------------------
// The contrived verifier V'.

struct QueryRecord {
    int channel = 0;
    bool state_successful = false;  // passed the subspace check
    bool non_abort = false;         // passed every check and produced a reply
    std::vector<uint8_t> z_in;
    std::vector<uint8_t> z_out;
    long timestamp = 0;
};

struct QueryLog {
    std::vector<QueryRecord> records;
};

struct EventCounters {
    std::vector<long> j;  // J_i: state-success at i without prior non-abort at i-1
    std::vector<long> b;  // B_i: second state-success at i
    long c = 0;           // C_{i,j}: state-success at i after state-success at j >= i
    long d = 0;           // D: non-abort with a mismatched Z register
    long e = 0;           // E: run succeeded without a non-abort somewhere
    long total() const;
};

// sim_succeeded: whether the driven run ended in success (needed for E).
EventCounters classify_queries(const QueryLog& log, int channels, bool sim_succeeded);

// Wire format of a V' channel message: the Pi payload bytes plus the Z and T
// registers.
struct ContrivedMsg {
    std::vector<uint8_t> pi_payload;
    std::vector<uint8_t> z;
    Bits t;
};
std::vector<uint8_t> encode_contrived(const ContrivedMsg& m);
ContrivedMsg decode_contrived(const std::vector<uint8_t>& bytes);

// V' wrapping the honest Pi verifier: channel r projects Y onto S_r, checks
// the tag over Z, decrypts the wrapped verifier state, runs the honest round,
// and re-initializes Y with |S_{r+1}>, Z and T with fresh ciphertext and tag.
// The channels themselves are stateless: everything flows through registers.
class ContrivedOracle : public ChannelOracle {
public:
    ContrivedOracle(int n, Graph x, ProtocolParams params, Rng& rng);

    int rounds() const override { return 6; }
    int width() const override { return n_; }
    VerifierMem initial_memory(Rng& rng) override;

    const QueryLog& query_log() const { return log_; }
    const Subspace& subspace(int index) const { return subspaces_.at(index); }
    // Verdict extracted from a non-abort final-channel reply, if any.
    std::optional<Verdict> final_verdict() const { return final_verdict_; }

protected:
    ChannelResult do_call(int round, const std::vector<uint8_t>& message, const VerifierMem& mem,
                          Rng& rng) override;

private:
    int n_;
    Graph x_;
    ProtocolParams params_;
    std::vector<Subspace> subspaces_;  // S_0 .. S_k
    SymKey sk_enc_;
    TagKey sk_tag_;
    std::vector<uint8_t> initial_state_;  // serialized fresh verifier session
    QueryLog log_;
    std::optional<Verdict> final_verdict_;
    long clock_ = 0;
};

// ---------------------------------------------------------------------------
// Probe policies driving V'.

enum class ProbePolicy { StraightLine, OutOfOrder, RepeatQuery, SkipQuery };

struct ProbeResult {
    bool success = false;            // straight-line run reached an accept
    Verdict verdict{};
    QueryLog log;
    EventCounters events;
    long probe_attempts = 0;         // extra (out-of-order / repeat) queries made
    long probe_state_successes = 0;  // how many of them passed the subspace check
};

ProbeResult run_probe_policy(ProbePolicy policy, const Graph& x,
                             const std::optional<std::vector<int>>& witness,
                             const ProtocolParams& params, int n, Rng& rng);

// Forged-tag probe: random (Z, T) pairs thrown at a mid-protocol channel; a D
// event would require a tag forgery.
long count_forged_tag_events(const Graph& x, const ProtocolParams& params, int n, long attempts,
                             Rng& rng);

// ---------------------------------------------------------------------------
// The extracted prover P~.

struct ExtractionResult {
    Verdict verdict{};
    bool policy_deviated = false;  // the driven policy broke the straight line
    EventCounters events;
};

// Runs the straight-line policy against channels synthesized by P~, which
// forwards the Pi messages of state-successful queries to a live honest
// verifier and fills Z with Enc(0) (the ciphertext-swap hybrid). When
// `internal_gamma` is set, no live verifier is used: the channels carry the
// real encrypted verifier state end to end (the pre-swap hybrid).
ExtractionResult run_extracted_prover(const Graph& x,
                                      const std::optional<std::vector<int>>& witness,
                                      const ProtocolParams& params, int n, bool internal_gamma,
                                      Rng& rng);

}  // namespace qzk
