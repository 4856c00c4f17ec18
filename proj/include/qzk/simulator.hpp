// The space-bounded rewinding simulator: fully black-box access to a verifier
// wrapped as per-round channels, maximally-mixed lookahead threads, strict
// qubit accounting, and the exact effect computations backing the mixed-state
// bound checks.

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qzk/protocol.hpp"
#include "qzk/qsim.hpp"

namespace qzk {

// Opaque classical verifier state carried by the caller between channel
// calls; snapshots are cheap shared handles.
struct ChannelState {
    virtual ~ChannelState() = default;
};
using ChannelStatePtr = std::shared_ptr<const ChannelState>;

struct VerifierMem {
    ChannelStatePtr st;
    QState q = QState::zero(0);
};

struct ChannelResult {
    bool abort = false;
    std::vector<uint8_t> message;  // round payload bytes when not aborting
    VerifierMem mem;
};

// The full interface a simulator may touch: round/width metadata, an initial
// memory, and per-round calls. Nothing of the verifier internals leaks.
class ChannelOracle {
public:
    virtual ~ChannelOracle() = default;
    virtual int rounds() const = 0;
    virtual int width() const = 0;
    virtual VerifierMem initial_memory(Rng& rng) = 0;
    ChannelResult call(int round, const std::vector<uint8_t>& message, const VerifierMem& mem,
                       Rng& rng);
    const std::vector<long>& call_counts() const { return counts_; }

protected:
    virtual ChannelResult do_call(int round, const std::vector<uint8_t>& message,
                                  const VerifierMem& mem, Rng& rng) = 0;

private:
    std::vector<long> counts_;
};

// ---------------------------------------------------------------------------
// Wrapping Pi verifiers (honest or adversarial) as channel oracles.

struct QuantumAbortRule {
    UnitaryDescriptor pre;  // applied to the verifier's M qubits before measuring
    int measured = 0;       // prefix length
    std::vector<uint64_t> abort_outcomes;
};

struct ChallengeAbortRule {
    enum Kind { Any, RequireBitZero } kind = Any;
    int watched_bit = 0;
    bool allows(const Bits& b) const {
        return kind == Any || b.at(watched_bit) == 0;
    }
    // |{b : allows(b)}| / 2^lambda
    double fraction(int) const { return kind == Any ? 1.0 : 0.5; }
};

struct WrappedVerifierSpec {
    std::string name;
    int width = 0;                     // M
    std::optional<QState> advice;      // defaults to |0^M>
    bool abort_phi3 = false;           // p = 0 family
    bool abort_phi4 = false;           // delayed abort at step 6
    ChallengeAbortRule challenge_rule;
    std::optional<QuantumAbortRule> coin;  // measured during Phi3
};

std::unique_ptr<ChannelOracle> make_oracle(const WrappedVerifierSpec& spec, Graph x,
                                           ProtocolParams params, uint64_t seed);

// ---------------------------------------------------------------------------
// Simulation.

enum class SimStatus { Completed, VerifierAborted, IterationBudgetExceeded };

struct SimResult {
    SimStatus status = SimStatus::Completed;
    int abort_step = 0;       // Pi step at which the mirrored abort happened
    Verdict verdict{};        // meaningful when Completed
    Bits challenges;          // main-thread challenge bits
    long iterations = 0;      // lookahead loop executions
    int peak_qubits = 0;
    int width = 0;
    Transcript transcript;    // main-thread messages only
    VerifierMem final_memory;
};

SimResult simulate(const Graph& x, ChannelOracle& oracle, const ProtocolParams& params, Rng& rng,
                   long max_iters = 1000000);

// Honest prover driven across the same channel surface, for real-vs-simulated
// comparisons.
struct RealResult {
    int abort_step = 0;  // 0 when the session ran to a verdict
    Verdict verdict{};
    Bits challenges;
    Transcript transcript;
};
RealResult run_real_session(const Graph& x, ChannelOracle& oracle,
                            const std::optional<std::vector<int>>& witness,
                            const ProtocolParams& params, Rng& rng);

// ---------------------------------------------------------------------------
// Exact bound checks (density-matrix mode).

struct BoundReport {
    double p = 0;        // Tr(Lambda rho_res)
    double p_prime = 0;  // Tr(Gamma I/2^M)
    double bound = 0;    // (p / 2^M) (1 - 2^-lambda)
    bool ok = false;     // p_prime >= bound - 1e-9
};

// Exact effects for the wrapped verifier's step-3/4 behavior; M <= 5.
BoundReport bound_check(const WrappedVerifierSpec& spec, const ProtocolParams& params,
                        const std::optional<QState>& advice_override, Rng& rng);

struct TailReport {
    long runs = 0;
    long exceeded = 0;     // iterations > lambda / p_prime
    double threshold = 0;  // lambda / p_prime
    double tail_rate = 0;
    double bound = 0;      // e^-lambda
};

TailReport termination_tail(const WrappedVerifierSpec& spec, const Graph& x,
                            const ProtocolParams& params, long runs, Rng& rng);

}  // namespace qzk
