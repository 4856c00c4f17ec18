#include "qzk/adversary.hpp"

#include <algorithm>
#include <cmath>

namespace qzk {

// ---------------------------------------------------------------------------
// Zoo.

std::vector<ZooVerifier> build_zoo(int quantum_width) {
    std::vector<ZooVerifier> zoo;
    {
        WrappedVerifierSpec s;
        s.name = "honest";
        s.width = 0;
        zoo.push_back({s, "baseline honest behavior, p = 1"});
    }
    {
        WrappedVerifierSpec s;
        s.name = "always_abort";
        s.width = 1;
        s.abort_phi3 = true;
        zoo.push_back({s, "p = 0; the simulator must abort after step 1"});
    }
    {
        WrappedVerifierSpec s;
        s.name = "never_abort";
        s.width = 1;
        zoo.push_back({s, "p' = 1 - 2^-lambda; one lookahead suffices"});
    }
    {
        WrappedVerifierSpec s;
        s.name = "bit_conditional";
        s.width = 1;
        s.challenge_rule.kind = ChallengeAbortRule::RequireBitZero;
        s.challenge_rule.watched_bit = 0;
        zoo.push_back({s, "aborts unless the watched challenge bit is 0"});
    }
    {
        WrappedVerifierSpec s = [&] {
            WrappedVerifierSpec spec;
            spec.name = "quantum_coin";
            spec.width = quantum_width;
            const double theta = std::acos(std::sqrt(0.7));
            UnitaryDescriptor rot(quantum_width);
            rot.append(Gate::dense_gate({0}, Matrix{std::cos(theta), -std::sin(theta),
                                                    std::sin(theta), std::cos(theta)}));
            QuantumAbortRule rule;
            rule.pre = rot;
            rule.measured = 1;
            rule.abort_outcomes = {1};
            spec.coin = rule;
            return spec;
        }();
        zoo.push_back({s, "aborts iff measuring the rotated advice qubit gives 1; p = 0.7"});
    }
    {
        WrappedVerifierSpec s;
        s.name = "delayed_abort";
        s.width = 1;
        s.abort_phi4 = true;
        zoo.push_back({s, "aborts at step 6 after the rewinding window"});
    }
    return zoo;
}

// ---------------------------------------------------------------------------
// Malicious provers.

namespace {

// Drives a hand-rolled prover against a fresh honest verifier. The callback
// supplies c** given the view after step 4.
struct TrapdoorPhase {
    ReceiverMsg r_v;
    ReceiverMsg r_p;
    Commitment c_star;
    Bits r_star;
    Bits challenge;
    std::vector<Commitment> alpha_commits;
    std::vector<std::array<Bits, 2>> alphas;
    ReceiverMsg r_wi;
    Commitment c_star_star;
};

template <typename MakeCStarStar>
Verdict run_custom_prover(const Graph& x, const ProtocolParams& params, Rng& rng,
                          MakeCStarStar&& make_cc) {
    const int lambda = params.lambda;
    VerifierSession verifier(x, params, 1, Rng(rng()));
    TrapdoorPhase ph;

    ProtocolMsg m1 = verifier.start();
    ph.r_v = std::get<MsgReceiverInit>(m1.payload).r_v;
    ph.r_star = random_bits(lambda, rng);
    std::vector<Bits> seeds;
    ph.c_star = make_c_star(ph.r_v, ph.r_star, &seeds, rng);
    ph.r_p = sample_receiver_msg(lambda, rng);

    auto reply = [&](int round, Payload payload) {
        ProtocolMsg m;
        m.session_id = 1;
        m.round = round;
        m.dir = Dir::ProverToVerifier;
        m.payload = std::move(payload);
        return verifier.on_message(m);
    };

    StepResult r3 = reply(2, MsgCStar{ph.c_star, ph.r_p});
    ph.alpha_commits = std::get<MsgAlphaCommits>(r3.reply->payload).commits;
    ph.challenge = random_bits(lambda, rng);
    StepResult r5 = reply(4, MsgChallenge{ph.challenge});
    const auto& chosen = std::get<MsgOpenChosen>(r5.reply->payload).openings;
    ph.alphas.assign(lambda, {Bits(), Bits()});
    for (int i = 0; i < lambda; ++i) ph.alphas[i][ph.challenge[i]] = chosen[i].message;

    ph.c_star_star = make_cc(ph);
    StepResult r7 = reply(6, MsgCStarStar{ph.c_star_star});
    const auto& rest = std::get<MsgOpenRest>(r7.reply->payload);
    for (int i = 0; i < lambda; ++i)
        ph.alphas[i][1 - ph.challenge[i]] = rest.openings[i].message;
    ph.r_wi = rest.r_wi;

    WiInstance xwi = assemble_wi_instance(x, lambda, ph.c_star, ph.c_star_star, ph.alphas, ph.r_v);
    WiOrInstance inst = wi_or_instance(xwi);
    MsgWiCommit commit_msg;
    const WiOrWitness which = inst.right_cycle ? WiOrWitness::Right : WiOrWitness::None;
    WiOrProverState st = wi_or_commit(inst, which, std::nullopt, params.wi_reps, ph.r_wi, rng,
                                      &commit_msg.commits);
    StepResult r9 = reply(8, std::move(commit_msg));
    const Bits& e = std::get<MsgWiChallenge>(r9.reply->payload).e;
    StepResult r11 = reply(10, MsgWiResponse{wi_or_respond(st, e)});
    return *r11.verdict;
}

}  // namespace

Verdict run_guessing_prover(const Graph& x, const ProtocolParams& params, Rng& rng) {
    return run_custom_prover(x, params, rng, [&](const TrapdoorPhase& ph) {
        const int lambda = params.lambda;
        const int i_guess = static_cast<int>(rng() % lambda);
        const Bits g_guess = random_bits(lambda, rng);
        const Bits payload = encode_trapdoor_payload(lambda, i_guess, g_guess);
        return make_c_star_star(ph.r_v, lambda, payload, ph.r_star);
    });
}

Verdict run_mauling_prover(const Graph& x, const ProtocolParams& params, Rng& rng) {
    return run_custom_prover(x, params, rng, [&](const TrapdoorPhase& ph) {
        // Splice blocks of the verifier's own commitments into c**, hoping
        // they read as a commitment to a related value. The blocks do not
        // open under seeds derived from the committed r*.
        const int lambda = params.lambda;
        const size_t block = 3 * static_cast<size_t>(lambda);
        const int m = trapdoor_payload_bits(lambda);
        Commitment cc;
        cc.c.reserve(block * m);
        for (int l = 0; l < m; ++l) {
            const Commitment& source = ph.alpha_commits[l % ph.alpha_commits.size()];
            const size_t offset = (l % lambda) * block;
            cc.c.insert(cc.c.end(), source.c.begin() + offset, source.c.begin() + offset + block);
        }
        return cc;
    });
}

// ---------------------------------------------------------------------------
// Events.

long EventCounters::total() const {
    long sum = c + d + e;
    for (long v : j) sum += v;
    for (long v : b) sum += v;
    return sum;
}

EventCounters classify_queries(const QueryLog& log, int channels, bool sim_succeeded) {
    EventCounters ev;
    ev.j.assign(channels, 0);
    ev.b.assign(channels, 0);
    std::vector<long> state_successes(channels, 0);
    std::vector<bool> has_non_abort(channels, false);
    std::vector<bool> z_match_seen(channels, false);
    std::vector<std::vector<uint8_t>> last_z_out(channels);

    for (const auto& rec : log.records) {
        const int i = rec.channel;
        if (rec.state_successful) {
            // J_i: no non-abort to the previous channel yet.
            if (i > 0 && !has_non_abort[i - 1]) ++ev.j[i];
            // C_{i,j}: a strictly later channel already had a state-success.
            for (int later = i + 1; later < channels; ++later)
                if (state_successes[later] > 0) ++ev.c;
            if (state_successes[i] >= 1) ++ev.b[i];
            ++state_successes[i];
        }
        if (rec.non_abort) {
            if (i > 0) {
                // D: the Z register fed in differs from the Z produced by the
                // previous channel's last non-abort reply.
                if (!has_non_abort[i - 1] || rec.z_in != last_z_out[i - 1]) ++ev.d;
            }
            has_non_abort[i] = true;
            last_z_out[i] = rec.z_out;
        }
    }
    if (sim_succeeded)
        for (int i = 0; i < channels; ++i)
            if (!has_non_abort[i]) ++ev.e;
    return ev;
}

// ---------------------------------------------------------------------------
// Contrived verifier.

std::vector<uint8_t> encode_contrived(const ContrivedMsg& m) {
    std::vector<uint8_t> out;
    auto put_u32 = [&](uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xff);
    };
    put_u32(static_cast<uint32_t>(m.pi_payload.size()));
    out.insert(out.end(), m.pi_payload.begin(), m.pi_payload.end());
    put_u32(static_cast<uint32_t>(m.z.size()));
    out.insert(out.end(), m.z.begin(), m.z.end());
    put_u32(static_cast<uint32_t>(m.t.size()));
    auto packed = pack_bits(m.t);
    out.insert(out.end(), packed.begin(), packed.end());
    return out;
}

ContrivedMsg decode_contrived(const std::vector<uint8_t>& bytes) {
    size_t pos = 0;
    auto get_u32 = [&]() {
        if (pos + 4 > bytes.size()) throw FormatError("contrived message truncated");
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes[pos + i]) << (8 * i);
        pos += 4;
        return v;
    };
    ContrivedMsg m;
    uint32_t n = get_u32();
    if (pos + n > bytes.size()) throw FormatError("contrived message truncated");
    m.pi_payload.assign(bytes.begin() + pos, bytes.begin() + pos + n);
    pos += n;
    n = get_u32();
    if (pos + n > bytes.size()) throw FormatError("contrived message truncated");
    m.z.assign(bytes.begin() + pos, bytes.begin() + pos + n);
    pos += n;
    n = get_u32();
    const size_t tbytes = (n + 7) / 8;
    if (pos + tbytes != bytes.size()) throw FormatError("contrived message truncated");
    m.t = unpack_bits(std::vector<uint8_t>(bytes.begin() + pos, bytes.end()), n);
    return m;
}

namespace {

struct StatelessMarker : ChannelState {};

ProtocolMsg pi_msg(int round, const std::vector<uint8_t>& bytes) {
    ProtocolMsg m;
    m.session_id = 1;
    m.round = round;
    m.dir = Dir::ProverToVerifier;
    m.payload = payload_from_bytes(round, bytes);
    return m;
}

}  // namespace

ContrivedOracle::ContrivedOracle(int n, Graph x, ProtocolParams params, Rng& rng)
    : n_(n), x_(std::move(x)), params_(params) {
    if (n <= 0 || n % 2 != 0 || n > 10) throw ConfigError("contrived verifier needs even n <= 10");
    for (int i = 0; i <= rounds(); ++i) subspaces_.push_back(sample_subspace(n, n / 2, rng));
    sk_enc_ = sample_sym_key(params.lambda, rng);
    sk_tag_ = sample_tag_key(params.lambda, rng);
    VerifierSession fresh(x_, params_, 1, Rng(rng()));
    initial_state_ = fresh.save_state();
}

VerifierMem ContrivedOracle::initial_memory(Rng&) {
    VerifierMem mem;
    mem.st = std::make_shared<StatelessMarker>();
    mem.q = prepare_state(subspaces_[0]);
    return mem;
}

ChannelResult ContrivedOracle::do_call(int round, const std::vector<uint8_t>& message,
                                       const VerifierMem& mem, Rng& rng) {
    QueryRecord rec;
    rec.channel = round;
    rec.timestamp = clock_++;
    ChannelResult res;
    res.abort = true;
    res.mem.st = std::make_shared<StatelessMarker>();
    res.mem.q = mem.q;

    ContrivedMsg in;
    try {
        in = decode_contrived(message);
    } catch (const Error&) {
        log_.records.push_back(rec);
        return res;
    }
    rec.z_in = in.z;

    // Subspace check on Y.
    auto projected = project_A(subspaces_[round], mem.q, rng);
    res.mem.q = projected.post;
    if (projected.outcome != 0) {
        log_.records.push_back(rec);
        return res;
    }
    rec.state_successful = true;

    // Tag and state recovery for mid-protocol rounds.
    std::vector<uint8_t> state_bytes;
    if (round == 0) {
        state_bytes = initial_state_;
    } else {
        if (!tag_verify(sk_tag_, in.z, in.t)) {
            log_.records.push_back(rec);
            return res;
        }
        try {
            state_bytes = dec(sk_enc_, in.z);
        } catch (const Error&) {
            log_.records.push_back(rec);
            return res;
        }
    }

    // Honest round on the recovered verifier state; any malformed state or
    // message aborts the channel.
    std::optional<VerifierSession> session;
    try {
        session.emplace(VerifierSession::load_state(state_bytes));
    } catch (const Error&) {
        log_.records.push_back(rec);
        return res;
    }
    std::vector<uint8_t> beta;
    std::optional<Verdict> verdict;
    try {
        if (round == 0) {
            beta = payload_to_bytes(session->start().payload);
        } else {
            StepResult sr = session->on_message(pi_msg(2 * round, in.pi_payload));
            if (!sr.reply) {
                log_.records.push_back(rec);
                return res;
            }
            beta = payload_to_bytes(sr.reply->payload);
            if (sr.verdict) verdict = sr.verdict;
        }
    } catch (const Error&) {
        log_.records.push_back(rec);
        return res;
    }
    // The final channel counts as non-abort only when the wrapped verifier
    // accepted.
    if (round == rounds() - 1) {
        if (!verdict || verdict->kind != VerdictKind::Accept) {
            final_verdict_ = verdict;
            log_.records.push_back(rec);
            return res;
        }
        final_verdict_ = verdict;
    }

    ContrivedMsg out;
    out.pi_payload = beta;
    out.z = enc(sk_enc_, session->save_state(), rng);
    out.t = tag(sk_tag_, out.z);
    rec.z_out = out.z;
    rec.non_abort = true;
    log_.records.push_back(rec);

    res.abort = false;
    res.message = encode_contrived(out);
    res.mem.q = prepare_state(subspaces_[round + 1]);
    return res;
}

// ---------------------------------------------------------------------------
// Probe policies.

namespace {

// Honest prover over the contrived channels, threading Y/Z/T faithfully.
struct StraightDrive {
    bool success = false;
    Verdict verdict{};
    int aborted_channel = -1;
};

StraightDrive drive_straight_line(ContrivedOracle& oracle, const Graph& x,
                                  const std::optional<std::vector<int>>& witness,
                                  const ProtocolParams& params, Rng& rng) {
    StraightDrive out;
    ProverSession prover(x, witness, params, 1, Rng(rng()));
    VerifierMem mem = oracle.initial_memory(rng);
    ContrivedMsg next;
    for (int r = 0; r < oracle.rounds(); ++r) {
        ChannelResult res = oracle.call(r, encode_contrived(next), mem, rng);
        if (res.abort) {
            out.aborted_channel = r;
            out.verdict = Verdict{VerdictKind::Abort, r + 1};
            return out;
        }
        mem = std::move(res.mem);
        ContrivedMsg reply = decode_contrived(res.message);
        ProtocolMsg vmsg;
        vmsg.session_id = 1;
        vmsg.round = 2 * r + 1;
        vmsg.dir = Dir::VerifierToProver;
        vmsg.payload = payload_from_bytes(2 * r + 1, reply.pi_payload);
        StepResult pr = prover.on_message(vmsg);
        if (r == oracle.rounds() - 1) {
            out.verdict = std::get<MsgVerdict>(vmsg.payload).verdict;
            out.success = (out.verdict.kind == VerdictKind::Accept);
            return out;
        }
        if (!pr.reply) {
            out.verdict = pr.verdict.value_or(Verdict{VerdictKind::Abort, 0});
            return out;
        }
        next.pi_payload = payload_to_bytes(pr.reply->payload);
        next.z = reply.z;
        next.t = reply.t;
    }
    return out;
}

}  // namespace

ProbeResult run_probe_policy(ProbePolicy policy, const Graph& x,
                             const std::optional<std::vector<int>>& witness,
                             const ProtocolParams& params, int n, Rng& rng) {
    ContrivedOracle oracle(n, x, params, rng);
    ProbeResult out;

    auto probe_channel = [&](int channel, const QState& y, const ContrivedMsg& msg) {
        VerifierMem probe_mem;
        probe_mem.st = std::make_shared<StatelessMarker>();
        probe_mem.q = y;
        ChannelResult res = oracle.call(channel, encode_contrived(msg), probe_mem, rng);
        ++out.probe_attempts;
        if (oracle.query_log().records.back().state_successful) ++out.probe_state_successes;
        return res;
    };

    switch (policy) {
        case ProbePolicy::StraightLine:
            break;
        case ProbePolicy::OutOfOrder: {
            // Query channel 1 before any channel 0 activity, with |0^n> in Y.
            ContrivedMsg garbage;
            garbage.pi_payload = payload_to_bytes(MsgCStar{
                Commitment{Bits(3 * static_cast<size_t>(params.lambda) * params.lambda, 0)},
                ReceiverMsg{Bits(3 * static_cast<size_t>(params.lambda), 0)}});
            probe_channel(1, QState::zero(n), garbage);
            break;
        }
        case ProbePolicy::RepeatQuery: {
            // Run channel 0 honestly to obtain |S_1>, then measure-and-resend
            // two cloned attempts at channel 1.
            VerifierMem mem = oracle.initial_memory(rng);
            ChannelResult first = oracle.call(0, encode_contrived(ContrivedMsg{}), mem, rng);
            if (!first.abort) {
                ContrivedMsg reply = decode_contrived(first.message);
                // Measure |S_1> fully; both clone attempts resend the result.
                auto [outcome, cloned] = measure_prefix(first.mem.q, n, rng);
                ContrivedMsg attempt;
                attempt.pi_payload = payload_to_bytes(MsgCStar{
                    Commitment{Bits(3 * static_cast<size_t>(params.lambda) * params.lambda, 0)},
                    ReceiverMsg{Bits(3 * static_cast<size_t>(params.lambda), 0)}});
                attempt.z = reply.z;
                attempt.t = reply.t;
                probe_channel(1, cloned, attempt);
                probe_channel(1, cloned, attempt);
            }
            break;
        }
        case ProbePolicy::SkipQuery: {
            // Channel 0, then jump to channel 2 with the round-1 subspace
            // state: the round-2 check is against S_2, a fresh subspace.
            VerifierMem mem = oracle.initial_memory(rng);
            ChannelResult first = oracle.call(0, encode_contrived(ContrivedMsg{}), mem, rng);
            if (!first.abort) {
                ContrivedMsg reply = decode_contrived(first.message);
                ContrivedMsg attempt;
                attempt.pi_payload = payload_to_bytes(MsgChallenge{Bits(params.lambda, 0)});
                attempt.z = reply.z;
                attempt.t = reply.t;
                probe_channel(2, first.mem.q, attempt);
            }
            break;
        }
    }

    // The repeat and skip probes consumed the single |S_0> copy; only the
    // policies that left it untouched get to finish a session.
    if (policy == ProbePolicy::StraightLine || policy == ProbePolicy::OutOfOrder) {
        StraightDrive drive = drive_straight_line(oracle, x, witness, params, rng);
        out.success = drive.success;
        out.verdict = drive.verdict;
    } else {
        out.verdict = Verdict{VerdictKind::Abort, 0};
    }
    out.log = oracle.query_log();
    out.events = classify_queries(out.log, oracle.rounds(), out.success);
    return out;
}

long count_forged_tag_events(const Graph& x, const ProtocolParams& params, int n, long attempts,
                             Rng& rng) {
    long d_events = 0;
    const long per_oracle = 100;
    for (long done = 0; done < attempts;) {
        ContrivedOracle oracle(n, x, params, rng);
        // Obtain a genuine |S_1> and a genuine (Z, T) pair from channel 0.
        VerifierMem mem = oracle.initial_memory(rng);
        ChannelResult first = oracle.call(0, encode_contrived(ContrivedMsg{}), mem, rng);
        if (first.abort) continue;
        ContrivedMsg reply = decode_contrived(first.message);
        ContrivedMsg attempt;
        attempt.pi_payload = payload_to_bytes(MsgCStar{
            Commitment{Bits(3 * static_cast<size_t>(params.lambda) * params.lambda, 0)},
            ReceiverMsg{Bits(3 * static_cast<size_t>(params.lambda), 0)}});
        for (long i = 0; i < per_oracle && done < attempts; ++i, ++done) {
            // Forgery attempts: flipped ciphertext with the old tag, random
            // tags over the real ciphertext, and random pairs.
            ContrivedMsg forged = attempt;
            switch (i % 3) {
                case 0:
                    forged.z = reply.z;
                    forged.z[rng() % forged.z.size()] ^= static_cast<uint8_t>(1 + rng() % 255);
                    forged.t = reply.t;
                    break;
                case 1:
                    forged.z = reply.z;
                    forged.t = random_bits(2 * params.lambda, rng);
                    break;
                default:
                    forged.z.assign(reply.z.size(), 0);
                    for (auto& byte : forged.z) byte = static_cast<uint8_t>(rng());
                    forged.t = random_bits(2 * params.lambda, rng);
            }
            VerifierMem probe_mem;
            probe_mem.st = std::make_shared<StatelessMarker>();
            probe_mem.q = first.mem.q;  // genuine subspace state, so only the tag gates entry
            (void)oracle.call(1, encode_contrived(forged), probe_mem, rng);
        }
        EventCounters ev = classify_queries(oracle.query_log(), oracle.rounds(), false);
        d_events += ev.d;
    }
    return d_events;
}

// ---------------------------------------------------------------------------
// The extracted prover.

ExtractionResult run_extracted_prover(const Graph& x,
                                      const std::optional<std::vector<int>>& witness,
                                      const ProtocolParams& params, int n, bool internal_gamma,
                                      Rng& rng) {
    // P~'s own secrets.
    std::vector<Subspace> subspaces;
    for (int i = 0; i <= 6; ++i) subspaces.push_back(sample_subspace(n, n / 2, rng));
    SymKey sk_enc = sample_sym_key(params.lambda, rng);
    TagKey sk_tag = sample_tag_key(params.lambda, rng);

    ExtractionResult out;
    QueryLog log;
    long clock = 0;

    // The live verifier (unused in the internal-gamma world).
    VerifierSession live(x, params, 1, Rng(rng()));
    VerifierSession shadow = live;  // the internal world runs the same code

    // The straight-line policy: an honest prover threading registers through
    // the channels P~ synthesizes.
    ProverSession prover(x, witness, params, 1, Rng(rng()));
    QState y = prepare_state(subspaces[0]);
    ContrivedMsg next;
    std::vector<uint8_t> last_z;
    int expected = 0;

    for (int r = 0; r < 6; ++r) {
        // P~ receives the policy's query to channel r.
        QueryRecord rec;
        rec.channel = r;
        rec.timestamp = clock++;
        rec.z_in = next.z;
        if (r != expected) {
            out.policy_deviated = true;
            break;
        }
        // Subspace check against P~'s own S_r.
        auto projected = project_A(subspaces[r], y, rng);
        if (projected.outcome != 0) {
            log.records.push_back(rec);
            out.policy_deviated = true;
            break;
        }
        rec.state_successful = true;
        if (r > 0) {
            if (!tag_verify(sk_tag, next.z, next.t) || next.z != last_z) {
                log.records.push_back(rec);
                out.policy_deviated = true;
                break;
            }
        }

        // Forward the Pi message to the verifier (live or shadow).
        VerifierSession& v = internal_gamma ? shadow : live;
        std::vector<uint8_t> beta;
        std::optional<Verdict> verdict;
        if (r == 0) {
            beta = payload_to_bytes(v.start().payload);
        } else {
            StepResult sr = v.on_message(pi_msg(2 * r, next.pi_payload));
            if (!sr.reply) {
                log.records.push_back(rec);
                break;
            }
            beta = payload_to_bytes(sr.reply->payload);
            verdict = sr.verdict;
        }
        rec.non_abort = true;

        ContrivedMsg reply;
        reply.pi_payload = beta;
        reply.z = internal_gamma ? enc(sk_enc, v.save_state(), rng)
                                 : enc(sk_enc, std::vector<uint8_t>{0}, rng);
        reply.t = tag(sk_tag, reply.z);
        rec.z_out = reply.z;
        log.records.push_back(rec);
        last_z = reply.z;
        ++expected;

        if (r == 5) {
            out.verdict = verdict.value_or(Verdict{VerdictKind::Reject, 7});
            break;
        }

        // Hand the reply to the policy and collect its next query.
        ProtocolMsg vmsg;
        vmsg.session_id = 1;
        vmsg.round = 2 * r + 1;
        vmsg.dir = Dir::VerifierToProver;
        vmsg.payload = payload_from_bytes(2 * r + 1, reply.pi_payload);
        StepResult pr = prover.on_message(vmsg);
        if (!pr.reply) {
            out.verdict = pr.verdict.value_or(Verdict{VerdictKind::Abort, 0});
            break;
        }
        next.pi_payload = payload_to_bytes(pr.reply->payload);
        next.z = reply.z;
        next.t = reply.t;
        y = prepare_state(subspaces[r + 1]);
    }

    out.events = classify_queries(log, 6, out.verdict.kind == VerdictKind::Accept);
    return out;
}

}  // namespace qzk
