#include "qzk/simulator.hpp"

#include <algorithm>
#include <cmath>

namespace qzk {

ChannelResult ChannelOracle::call(int round, const std::vector<uint8_t>& message,
                                  const VerifierMem& mem, Rng& rng) {
    if (round < 0 || round >= rounds()) throw DimensionError("channel index out of range");
    if (mem.q.num_qubits() != width()) throw DimensionError("memory width mismatch");
    if (counts_.empty()) counts_.assign(rounds(), 0);
    ++counts_[round];
    return do_call(round, message, mem, rng);
}

namespace {

// Classical state of a wrapped Pi verifier between channel calls.
struct PiState : ChannelState {
    VerifierSession session;
    explicit PiState(VerifierSession s) : session(std::move(s)) {}
};

class PiChannelOracle : public ChannelOracle {
public:
    PiChannelOracle(WrappedVerifierSpec spec, Graph x, ProtocolParams params, uint64_t seed)
        : spec_(std::move(spec)), x_(std::move(x)), params_(params), seed_(seed) {}

    int rounds() const override { return 6; }
    int width() const override { return spec_.width; }

    VerifierMem initial_memory(Rng&) override {
        VerifierMem mem;
        mem.st = std::make_shared<PiState>(VerifierSession(x_, params_, kSessionId, Rng(seed_)));
        mem.q = spec_.advice ? *spec_.advice : QState::zero(spec_.width);
        if (mem.q.num_qubits() != spec_.width) throw DimensionError("advice width mismatch");
        return mem;
    }

protected:
    ChannelResult do_call(int round, const std::vector<uint8_t>& message, const VerifierMem& mem,
                          Rng& rng) override {
        const auto* state = dynamic_cast<const PiState*>(mem.st.get());
        if (!state) throw ProtocolError("foreign channel state");
        VerifierSession session = state->session;  // snapshot copy
        QState q = mem.q;

        auto pack = [&](VerifierSession s, QState qq, std::vector<uint8_t> bytes) {
            ChannelResult res;
            res.message = std::move(bytes);
            res.mem.st = std::make_shared<PiState>(std::move(s));
            res.mem.q = std::move(qq);
            return res;
        };
        auto abort_result = [&](VerifierSession s, QState qq) {
            ChannelResult res;
            res.abort = true;
            res.mem.st = std::make_shared<PiState>(std::move(s));
            res.mem.q = std::move(qq);
            return res;
        };

        switch (round) {
            case 0: {  // Phi_1: emit the receiver message
                ProtocolMsg out = session.start();
                return pack(std::move(session), std::move(q), payload_to_bytes(out.payload));
            }
            case 1: {  // Phi_2: alpha commitments
                StepResult res = session.on_message(make_msg(2, message));
                if (!res.reply) return abort_result(std::move(session), std::move(q));
                return pack(std::move(session), std::move(q),
                            payload_to_bytes(res.reply->payload));
            }
            case 2: {  // Phi_3: challenge -> openings, with the abort rules
                ProtocolMsg msg = make_msg(4, message);
                const Bits& b = std::get<MsgChallenge>(msg.payload).b;
                if (spec_.abort_phi3 || !spec_.challenge_rule.allows(b))
                    return abort_result(std::move(session), std::move(q));
                if (spec_.coin) {
                    QState evolved = apply_unitary(q, spec_.coin->pre);
                    auto [outcome, post] = measure_prefix(evolved, spec_.coin->measured, rng);
                    q = std::move(post);
                    const uint64_t o = bits_to_uint(outcome);
                    const bool bad =
                        std::find(spec_.coin->abort_outcomes.begin(),
                                  spec_.coin->abort_outcomes.end(),
                                  o) != spec_.coin->abort_outcomes.end();
                    if (bad) return abort_result(std::move(session), std::move(q));
                }
                StepResult res = session.on_message(msg);
                if (!res.reply) return abort_result(std::move(session), std::move(q));
                return pack(std::move(session), std::move(q),
                            payload_to_bytes(res.reply->payload));
            }
            case 3: {  // Phi_4: c** -> remaining openings
                if (spec_.abort_phi4) return abort_result(std::move(session), std::move(q));
                StepResult res = session.on_message(make_msg(6, message));
                if (!res.reply) return abort_result(std::move(session), std::move(q));
                return pack(std::move(session), std::move(q),
                            payload_to_bytes(res.reply->payload));
            }
            case 4: {  // Phi_5: WI commitments -> challenge coins
                StepResult res = session.on_message(make_msg(8, message));
                if (!res.reply) return abort_result(std::move(session), std::move(q));
                return pack(std::move(session), std::move(q),
                            payload_to_bytes(res.reply->payload));
            }
            case 5: {  // Phi_6: WI responses -> verdict
                StepResult res = session.on_message(make_msg(10, message));
                if (!res.reply) return abort_result(std::move(session), std::move(q));
                return pack(std::move(session), std::move(q),
                            payload_to_bytes(res.reply->payload));
            }
        }
        throw DimensionError("channel index out of range");
    }

private:
    static constexpr uint64_t kSessionId = 1;

    ProtocolMsg make_msg(int round, const std::vector<uint8_t>& bytes) const {
        ProtocolMsg m;
        m.session_id = kSessionId;
        m.round = round;
        m.dir = Dir::ProverToVerifier;
        m.payload = payload_from_bytes(round, bytes);
        return m;
    }

    WrappedVerifierSpec spec_;
    Graph x_;
    ProtocolParams params_;
    uint64_t seed_;
};

ProtocolMsg wrap_reply(int round, const std::vector<uint8_t>& bytes) {
    ProtocolMsg m;
    m.session_id = 1;
    m.round = round;
    m.dir = Dir::VerifierToProver;
    m.payload = payload_from_bytes(round, bytes);
    return m;
}

}  // namespace

std::unique_ptr<ChannelOracle> make_oracle(const WrappedVerifierSpec& spec, Graph x,
                                           ProtocolParams params, uint64_t seed) {
    if (spec.coin && spec.coin->pre.arity() != spec.width)
        throw DimensionError("coin rule arity != verifier width");
    return std::make_unique<PiChannelOracle>(spec, std::move(x), params, seed);
}

// ---------------------------------------------------------------------------
// The simulator.

SimResult simulate(const Graph& x, ChannelOracle& oracle, const ProtocolParams& params, Rng& rng,
                   long max_iters) {
    if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
    const int lambda = params.lambda;
    const int m_width = oracle.width();
    SimResult out;
    out.width = m_width;
    QubitBudget budget(2 * m_width);

    auto record = [&](int round, Dir dir, Payload payload) {
        ProtocolMsg msg;
        msg.session_id = 1;
        msg.round = round;
        msg.dir = dir;
        msg.payload = std::move(payload);
        out.transcript.messages.push_back(std::move(msg));
    };
    auto finish_abort = [&](int step, VerifierMem mem) {
        out.status = SimStatus::VerifierAborted;
        out.abort_step = step;
        out.verdict = Verdict{VerdictKind::Abort, step};
        out.transcript.verdict = out.verdict;
        out.peak_qubits = budget.peak_used();
        out.final_memory = std::move(mem);
        return out;
    };

    // Register X: the verifier's own qubits, resident for the whole run.
    VerifierMem mem = oracle.initial_memory(rng);
    budget.allocate(m_width);

    // Step 1: main thread through step 4 of Pi.
    ChannelResult r1 = oracle.call(0, {}, mem, rng);
    if (r1.abort) return finish_abort(1, std::move(r1.mem));
    mem = std::move(r1.mem);
    const auto r_v = std::get<MsgReceiverInit>(payload_from_bytes(1, r1.message)).r_v;
    record(1, Dir::VerifierToProver, MsgReceiverInit{r_v});

    const Bits r_star = random_bits(lambda, rng);
    std::vector<Bits> r_seeds;
    Commitment c_star = make_c_star(r_v, r_star, &r_seeds, rng);
    ReceiverMsg r_p = sample_receiver_msg(lambda, rng);
    record(2, Dir::ProverToVerifier, MsgCStar{c_star, r_p});
    ChannelResult r2 = oracle.call(1, payload_to_bytes(MsgCStar{c_star, r_p}), mem, rng);
    if (r2.abort) return finish_abort(2, std::move(r2.mem));
    mem = std::move(r2.mem);
    const auto alpha_commits = std::get<MsgAlphaCommits>(payload_from_bytes(3, r2.message));
    record(3, Dir::VerifierToProver, alpha_commits);

    // Classical snapshot of the pre-challenge state; the quantum part is not
    // copied (it cannot be) - lookaheads will use the maximally mixed state.
    ChannelStatePtr pre_challenge_st = mem.st;

    const Bits b = random_bits(lambda, rng);
    out.challenges = b;
    record(4, Dir::ProverToVerifier, MsgChallenge{b});
    ChannelResult r3 = oracle.call(2, payload_to_bytes(MsgChallenge{b}), mem, rng);
    if (r3.abort) return finish_abort(4, std::move(r3.mem));
    mem = std::move(r3.mem);  // holds rho_res and st'
    const auto chosen = std::get<MsgOpenChosen>(payload_from_bytes(5, r3.message));
    record(5, Dir::VerifierToProver, chosen);

    // Step 2: lookahead threads on (I/2^M, st).
    Bits b_prime;
    std::optional<MsgOpenChosen> lookahead_openings;
    while (true) {
        if (out.iterations >= max_iters) {
            out.status = SimStatus::IterationBudgetExceeded;
            out.verdict = Verdict{VerdictKind::Abort, 4};
            out.transcript.verdict = out.verdict;
            out.peak_qubits = budget.peak_used();
            out.final_memory = std::move(mem);
            return out;
        }
        ++out.iterations;
        budget.allocate(m_width);  // register R
        VerifierMem lookahead{pre_challenge_st, maximally_mixed(m_width)};
        Bits candidate = random_bits(lambda, rng);
        ChannelResult lr = oracle.call(2, payload_to_bytes(MsgChallenge{candidate}), lookahead, rng);
        budget.release(m_width);  // R discarded
        if (lr.abort) continue;
        if (candidate == b) continue;  // need an index with b_i != b'_i
        b_prime = candidate;
        lookahead_openings = std::get<MsgOpenChosen>(payload_from_bytes(5, lr.message));
        break;
    }

    // Step 3/4: back on the main thread; commit (i*, gamma).
    int i_star = -1;
    for (int i = 0; i < lambda; ++i)
        if (b[i] != b_prime[i]) {
            i_star = i;
            break;
        }
    const Bits& alpha_main = chosen.openings[i_star].message;       // alpha_{i*, b_i*}
    const Bits& alpha_look = lookahead_openings->openings[i_star].message;
    const Bits gamma = xor_bits(alpha_main, alpha_look);
    const Bits payload = encode_trapdoor_payload(lambda, i_star, gamma);
    Commitment c_star_star = make_c_star_star(r_v, lambda, payload, r_star);
    record(6, Dir::ProverToVerifier, MsgCStarStar{c_star_star});
    ChannelResult r4 = oracle.call(3, payload_to_bytes(MsgCStarStar{c_star_star}), mem, rng);
    if (r4.abort) return finish_abort(6, std::move(r4.mem));
    mem = std::move(r4.mem);
    const auto rest = std::get<MsgOpenRest>(payload_from_bytes(7, r4.message));
    record(7, Dir::VerifierToProver, rest);

    // Assemble the full alpha table from the main thread's openings.
    std::vector<std::array<Bits, 2>> alphas(lambda);
    for (int i = 0; i < lambda; ++i) {
        alphas[i][b[i]] = chosen.openings[i].message;
        alphas[i][1 - b[i]] = rest.openings[i].message;
    }

    // Steps 5/6: WI phase with the trapdoor witness.
    WiInstance xwi = assemble_wi_instance(x, lambda, c_star, c_star_star, alphas, r_v);
    WiOrInstance inst = wi_or_instance(xwi);
    MsgWiCommit wi_commit;
    WiOrProverState wi_state =
        wi_or_commit(inst, inst.right_cycle ? WiOrWitness::Right : WiOrWitness::None,
                     std::nullopt, params.wi_reps, rest.r_wi, rng, &wi_commit.commits);
    record(8, Dir::ProverToVerifier, wi_commit);
    ChannelResult r5 = oracle.call(4, payload_to_bytes(wi_commit), mem, rng);
    if (r5.abort) return finish_abort(7, std::move(r5.mem));
    mem = std::move(r5.mem);
    const auto wi_challenge = std::get<MsgWiChallenge>(payload_from_bytes(9, r5.message));
    record(9, Dir::VerifierToProver, wi_challenge);

    MsgWiResponse wi_resp{wi_or_respond(wi_state, wi_challenge.e)};
    record(10, Dir::ProverToVerifier, wi_resp);
    ChannelResult r6 = oracle.call(5, payload_to_bytes(wi_resp), mem, rng);
    if (r6.abort) return finish_abort(7, std::move(r6.mem));
    mem = std::move(r6.mem);
    const auto verdict_msg = std::get<MsgVerdict>(payload_from_bytes(11, r6.message));
    record(11, Dir::VerifierToProver, verdict_msg);

    out.status = SimStatus::Completed;
    out.verdict = verdict_msg.verdict;
    out.transcript.verdict = out.verdict;
    out.peak_qubits = budget.peak_used();
    out.final_memory = std::move(mem);
    return out;
}

RealResult run_real_session(const Graph& x, ChannelOracle& oracle,
                            const std::optional<std::vector<int>>& witness,
                            const ProtocolParams& params, Rng& rng) {
    RealResult out;
    ProverSession prover(x, witness, params, 1, Rng(rng()));
    VerifierMem mem = oracle.initial_memory(rng);

    ChannelResult reply = oracle.call(0, {}, mem, rng);
    int step_of_round[7] = {0, 1, 2, 4, 6, 7, 7};  // channel -> Pi step for aborts
    for (int round = 0; round < 6; ++round) {
        if (reply.abort) {
            out.abort_step = step_of_round[round + 1];
            out.verdict = Verdict{VerdictKind::Abort, out.abort_step};
            out.transcript.verdict = out.verdict;
            return out;
        }
        mem = std::move(reply.mem);
        ProtocolMsg vmsg = wrap_reply(2 * round + 1, reply.message);
        out.transcript.messages.push_back(vmsg);
        StepResult pr = prover.on_message(vmsg);
        if (pr.verdict && !pr.reply) {
            out.verdict = *pr.verdict;
            out.transcript.verdict = out.verdict;
            return out;
        }
        if (round == 5) {
            out.verdict = std::get<MsgVerdict>(vmsg.payload).verdict;
            out.transcript.verdict = out.verdict;
            return out;
        }
        if (!pr.reply) throw ProtocolError("prover produced no reply");
        out.transcript.messages.push_back(*pr.reply);
        if (auto* c = std::get_if<MsgChallenge>(&pr.reply->payload)) out.challenges = c->b;
        reply = oracle.call(round + 1, payload_to_bytes(pr.reply->payload), mem, rng);
    }
    throw ProtocolError("session did not terminate");
}

// ---------------------------------------------------------------------------
// Exact effects.

namespace {

// Lambda_q for the coin rule: pre^dagger (sum of kept-outcome projectors) pre.
Matrix quantum_effect(const WrappedVerifierSpec& spec) {
    const int m = spec.width;
    const size_t dim = size_t{1} << m;
    if (!spec.coin) {
        if (spec.abort_phi3) return Matrix(dim * dim, cd{0});
        return identity_matrix(dim);
    }
    const int l = spec.coin->measured;
    const size_t block = dim >> l;
    Matrix keep(dim * dim, cd{0});
    for (uint64_t o = 0; o < (uint64_t{1} << l); ++o) {
        if (std::find(spec.coin->abort_outcomes.begin(), spec.coin->abort_outcomes.end(), o) !=
            spec.coin->abort_outcomes.end())
            continue;
        for (uint64_t i = o * block; i < (o + 1) * block; ++i) keep[i * dim + i] = 1;
    }
    Matrix u = spec.coin->pre.materialize();
    Matrix effect = matrix_mul(matrix_adjoint(u), matrix_mul(keep, u));
    if (spec.abort_phi3) return Matrix(dim * dim, cd{0});
    return effect;
}

// Conditional post-measurement state given a non-abort at Phi_3.
QState conditioned_residual(const WrappedVerifierSpec& spec, const QState& advice) {
    if (!spec.coin) return advice.to_density();
    const int m = spec.width;
    const size_t dim = size_t{1} << m;
    QState evolved = apply_unitary(advice.to_density(), spec.coin->pre);
    const int l = spec.coin->measured;
    const size_t block = dim >> l;
    Matrix mix(dim * dim, cd{0});
    double total = 0;
    const auto& rho = evolved.rho();
    for (uint64_t o = 0; o < (uint64_t{1} << l); ++o) {
        if (std::find(spec.coin->abort_outcomes.begin(), spec.coin->abort_outcomes.end(), o) !=
            spec.coin->abort_outcomes.end())
            continue;
        for (uint64_t r = o * block; r < (o + 1) * block; ++r)
            for (uint64_t c = o * block; c < (o + 1) * block; ++c)
                mix[r * dim + c] += rho[r * dim + c];
        for (uint64_t r = o * block; r < (o + 1) * block; ++r) total += rho[r * dim + r].real();
    }
    if (total <= 0) return maximally_mixed(m);  // abort-certain verifier; placeholder
    for (auto& v : mix) v /= total;
    return QState::density(m, std::move(mix));
}

}  // namespace

BoundReport bound_check(const WrappedVerifierSpec& spec, const ProtocolParams& params,
                        const std::optional<QState>& advice_override, Rng& rng) {
    if (spec.width > 5) throw ModeError("bound_check runs in exact mode only up to M=5");
    const int lambda = params.lambda;
    const QState advice = advice_override ? *advice_override
                                          : (spec.advice ? *spec.advice : QState::zero(spec.width));

    // Effect of "steps 3-4 do not abort" = challenge fraction x quantum effect.
    const Matrix lambda_q = quantum_effect(spec);
    const double g_fraction = spec.abort_phi3 ? 0.0 : spec.challenge_rule.fraction(lambda);

    // rho_res: the verifier's post-step-4 state, conditioned on not aborting.
    const QState rho_res = conditioned_residual(spec, advice);
    double p = 0;
    if (g_fraction > 0) {
        cd acc{0};
        const auto& rho = rho_res.rho();
        const size_t d = rho_res.dim();
        for (size_t r = 0; r < d; ++r)
            for (size_t c = 0; c < d; ++c) acc += lambda_q[r * d + c] * rho[c * d + r];
        p = g_fraction * acc.real();
    }

    // Gamma on I/2^M: fresh challenge must differ from the (non-abort) main
    // challenge somewhere, so one allowed challenge drops out.
    const double total = std::pow(2.0, lambda);
    const double allowed = g_fraction * total;
    const double gamma_fraction = (allowed > 0) ? (allowed - 1.0) / total : 0.0;
    double p_prime = 0;
    {
        cd acc{0};
        const size_t d = size_t{1} << spec.width;
        for (size_t i = 0; i < d; ++i) acc += lambda_q[i * d + i];
        p_prime = gamma_fraction * acc.real() / static_cast<double>(d);
    }

    BoundReport report;
    report.p = p;
    report.p_prime = p_prime;
    report.bound = (p / std::pow(2.0, spec.width)) * (1.0 - std::pow(2.0, -lambda));
    report.ok = report.p_prime >= report.bound - 1e-9;
    (void)rng;
    return report;
}

TailReport termination_tail(const WrappedVerifierSpec& spec, const Graph& x,
                            const ProtocolParams& params, long runs, Rng& rng) {
    Rng probe_rng(rng());
    BoundReport bounds = bound_check(spec, params, std::nullopt, probe_rng);
    TailReport report;
    report.bound = std::exp(-static_cast<double>(params.lambda));
    if (bounds.p_prime <= 0) {
        report.threshold = 0;
        return report;  // no successful lookahead exists; tail undefined
    }
    report.threshold = params.lambda / bounds.p_prime;
    for (long r = 0; r < runs; ++r) {
        auto oracle = make_oracle(spec, x, params, rng());
        SimResult res = simulate(x, *oracle, params, rng, 100000);
        if (res.status == SimStatus::VerifierAborted && res.abort_step <= 4) continue;
        ++report.runs;
        if (static_cast<double>(res.iterations) > report.threshold) ++report.exceeded;
    }
    report.tail_rate =
        report.runs > 0 ? static_cast<double>(report.exceeded) / report.runs : 0.0;
    return report;
}

}  // namespace qzk
