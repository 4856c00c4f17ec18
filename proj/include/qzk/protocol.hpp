// Protocol: the six-step trapdoor phase plus the WI phase, as prover and
// verifier state machines with replay-verifiable transcripts and a framed wire
// codec.
//
// Round map (two-message commitments flattened onto explicit rounds; receiver
// messages ride with the preceding message of the same party where possible):
//   1  V->P  receiver message R_V for the prover's c* and c**
//   2  P->V  c* batch, plus the prover's receiver message R_P for the alphas
//   3  V->P  2*lambda alpha commitments, order (i,0),(i,1)
//   4  P->V  challenge bits b_1..b_lambda
//   5  V->P  openings of the chosen alphas (i, b_i)
//   6  P->V  c** batch
//   7  V->P  remaining openings (i, 1-b_i), plus receiver message R_WI
//   8  P->V  WI commitments (both branches, t repetitions)
//   9  V->P  WI challenge bits e_1..e_t
//  10  P->V  WI responses
//  11  V->P  verdict

#pragma once

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "qzk/common.hpp"
#include "qzk/crypto.hpp"
#include "qzk/wi.hpp"

namespace qzk {

enum class VerdictKind { Accept, Reject, Abort };

struct Verdict {
    VerdictKind kind = VerdictKind::Abort;
    int step = 0;  // protocol step (1..6 trapdoor, 7 = WI phase)
    bool operator==(const Verdict& o) const { return kind == o.kind && step == o.step; }
};

// Payloads, one per round.
struct MsgReceiverInit { ReceiverMsg r_v; };
struct MsgCStar {
    Commitment c_star;
    ReceiverMsg r_p;
};
struct MsgAlphaCommits { std::vector<Commitment> commits; };  // index 2i+b
struct MsgChallenge { Bits b; };
struct MsgOpenChosen { std::vector<Opening> openings; };
struct MsgCStarStar { Commitment c; };
struct MsgOpenRest {
    std::vector<Opening> openings;
    ReceiverMsg r_wi;
};
struct MsgWiCommit { WiOrCommitMsg commits; };
struct MsgWiChallenge { Bits e; };
struct MsgWiResponse { std::vector<WiOrResponseRep> reps; };
struct MsgVerdict { Verdict verdict; };

using Payload = std::variant<MsgReceiverInit, MsgCStar, MsgAlphaCommits, MsgChallenge,
                             MsgOpenChosen, MsgCStarStar, MsgOpenRest, MsgWiCommit,
                             MsgWiChallenge, MsgWiResponse, MsgVerdict>;

enum class Dir { ProverToVerifier, VerifierToProver };

struct ProtocolMsg {
    uint64_t session_id = 0;
    int round = 0;
    Dir dir = Dir::VerifierToProver;
    Payload payload;
};

// Wire frame: 4-byte big-endian length, then a UTF-8 JSON object
// {session_id, round, dir, type, payload_hex}.
std::vector<uint8_t> encode_msg(const ProtocolMsg& msg);
ProtocolMsg decode_msg(const std::vector<uint8_t>& frame);

// Bare payload bytes (the payload_hex content), used by the channel wrapping
// of verifiers where messages travel without the JSON envelope.
std::vector<uint8_t> payload_to_bytes(const Payload& p);
Payload payload_from_bytes(int round, const std::vector<uint8_t>& bytes);

struct Transcript {
    std::vector<ProtocolMsg> messages;
    Verdict verdict;
};

struct ProtocolParams {
    int lambda = 16;
    int wi_reps = 40;
};

// ---------------------------------------------------------------------------
// Sessions. Both machines are value types: copying one snapshots it.

struct StepResult {
    std::optional<ProtocolMsg> reply;
    std::optional<Verdict> verdict;  // set when this party has decided
};

class ProverSession {
public:
    // witness: a Hamiltonian cycle of x, or nullopt for a prover that will
    // fall back to the trapdoor branch (accepted only when it exists).
    ProverSession(Graph x, std::optional<std::vector<int>> witness, ProtocolParams params,
                  uint64_t session_id, Rng rng);

    StepResult on_message(const ProtocolMsg& msg);
    const Bits& r_star() const { return r_star_; }

private:
    Graph x_;
    std::optional<std::vector<int>> witness_;
    ProtocolParams params_;
    uint64_t session_id_;
    Rng rng_;
    int next_round_ = 1;

    Bits r_star_;                    // sampled before any message arrives
    std::vector<Bits> r_seeds_;
    ReceiverMsg r_v_;
    ReceiverMsg r_p_;
    Commitment c_star_;
    Commitment c_star_star_;
    std::vector<Commitment> alpha_commits_;
    Bits challenge_;
    std::vector<std::array<Bits, 2>> alphas_;
    WiOrProverState wi_state_;
    WiOrInstance wi_inst_;
};

class VerifierSession {
public:
    VerifierSession(Graph x, ProtocolParams params, uint64_t session_id, Rng rng);

    // Emits round 1.
    ProtocolMsg start();
    StepResult on_message(const ProtocolMsg& msg);

    // Test knob: refuse to answer from the given step on (emits no reply).
    void abort_at_step(int step) { abort_step_ = step; }

    const std::vector<std::array<Bits, 2>>& alphas() const { return alphas_; }

    // Canonical byte encoding of the full session state (including the coin
    // stream), used where a verifier's internal state travels encrypted.
    std::vector<uint8_t> save_state() const;
    static VerifierSession load_state(const std::vector<uint8_t>& bytes);

private:
    friend struct VerifierStateCodec;
    Graph x_;
    ProtocolParams params_;
    uint64_t session_id_;
    Rng rng_;
    int next_round_ = 2;
    int abort_step_ = 0;

    ReceiverMsg r_v_;
    ReceiverMsg r_p_;
    ReceiverMsg r_wi_;
    std::vector<std::array<Bits, 2>> alphas_;
    std::vector<std::array<std::vector<Bits>, 2>> alpha_seeds_;
    Commitment c_star_;
    Commitment c_star_star_;
    std::vector<Commitment> alpha_commits_;
    Bits challenge_;
    Bits wi_challenge_;
    WiOrCommitMsg wi_commits_;
};

// ---------------------------------------------------------------------------
// Drivers.

class Transport;  // see transport.hpp

Transcript run_session(ProverSession prover, VerifierSession verifier);
// Drives one party over a wire; the peer runs remotely.
Verdict drive_prover(ProverSession prover, Transport& t);
Verdict drive_verifier(VerifierSession verifier, Transport& t);

// Replays the verifier-side checks of a stored transcript and returns the
// reproduced verdict (structure errors throw ProtocolError).
Verdict replay_transcript(const Graph& x, const ProtocolParams& params, const Transcript& tr);

// Shared helpers for parties that assemble protocol messages by hand.
Commitment make_c_star(const ReceiverMsg& r_v, const Bits& r_star, std::vector<Bits>* seeds,
                       Rng& rng);
Commitment make_c_star_star(const ReceiverMsg& r_v, int lambda, const Bits& payload,
                            const Bits& r_star);
WiInstance assemble_wi_instance(const Graph& x, int lambda, const Commitment& c_star,
                                const Commitment& c_star_star,
                                const std::vector<std::array<Bits, 2>>& alphas,
                                const ReceiverMsg& r_v);

}  // namespace qzk
