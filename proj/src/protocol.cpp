#include "qzk/protocol.hpp"

#include <json.hpp>

#include <algorithm>
#include <sstream>

namespace qzk {

namespace {

// ---------------------------------------------------------------------------
// Binary payload serialization.

struct Writer {
    std::vector<uint8_t> out;
    void u8(uint8_t v) { out.push_back(v); }
    void u16(uint16_t v) {
        out.push_back(v & 0xff);
        out.push_back((v >> 8) & 0xff);
    }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xff);
    }
    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) out.push_back((v >> (8 * i)) & 0xff);
    }
    void bits(const Bits& b) {
        u32(static_cast<uint32_t>(b.size()));
        auto packed = pack_bits(b);
        out.insert(out.end(), packed.begin(), packed.end());
    }
    void bytes(const std::vector<uint8_t>& b) {
        u32(static_cast<uint32_t>(b.size()));
        out.insert(out.end(), b.begin(), b.end());
    }
    void ints(const std::vector<int>& v) {
        u16(static_cast<uint16_t>(v.size()));
        for (int x : v) u16(static_cast<uint16_t>(x));
    }
};

struct Reader {
    const std::vector<uint8_t>& in;
    size_t pos = 0;
    void need(size_t n) const {
        if (pos + n > in.size()) throw FormatError("payload truncated");
    }
    uint8_t u8() {
        need(1);
        return in[pos++];
    }
    uint16_t u16() {
        need(2);
        uint16_t v = in[pos] | (in[pos + 1] << 8);
        pos += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(in[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(in[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    Bits bits() {
        uint32_t n = u32();
        if (n > (1u << 24)) throw FormatError("bit string too long");
        size_t nbytes = (n + 7) / 8;
        need(nbytes);
        Bits b = unpack_bits(std::vector<uint8_t>(in.begin() + pos, in.begin() + pos + nbytes), n);
        pos += nbytes;
        return b;
    }
    std::vector<uint8_t> bytes() {
        uint32_t n = u32();
        if (n > (1u << 24)) throw FormatError("byte string too long");
        need(n);
        std::vector<uint8_t> b(in.begin() + pos, in.begin() + pos + n);
        pos += n;
        return b;
    }
    std::vector<int> ints() {
        uint16_t n = u16();
        std::vector<int> v(n);
        for (auto& x : v) x = u16();
        return v;
    }
    void done() const {
        if (pos != in.size()) throw FormatError("trailing payload bytes");
    }
};

void put_opening(Writer& w, const Opening& o) {
    w.bits(o.message);
    w.u16(static_cast<uint16_t>(o.seeds.size()));
    for (const auto& s : o.seeds) w.bits(s);
}

Opening get_opening(Reader& r) {
    Opening o;
    o.message = r.bits();
    uint16_t n = r.u16();
    o.seeds.resize(n);
    for (auto& s : o.seeds) s = r.bits();
    return o;
}

void put_blum_response(Writer& w, const BlumResponse& resp) {
    w.u8(static_cast<uint8_t>(resp.challenge));
    w.ints(resp.perm);
    w.ints(resp.cycle);
    w.bits(resp.opened_bits);
    w.u32(static_cast<uint32_t>(resp.opened_seeds.size()));
    for (const auto& s : resp.opened_seeds) w.bits(s);
}

BlumResponse get_blum_response(Reader& r) {
    BlumResponse resp;
    resp.challenge = r.u8() & 1;
    resp.perm = r.ints();
    resp.cycle = r.ints();
    resp.opened_bits = r.bits();
    uint32_t n = r.u32();
    if (n > (1u << 20)) throw FormatError("too many opened seeds");
    resp.opened_seeds.resize(n);
    for (auto& s : resp.opened_seeds) s = r.bits();
    return resp;
}

const char* type_name(const Payload& p) {
    static const char* names[] = {"receiver_init", "c_star",   "alpha_commits", "challenge",
                                  "open_chosen",   "c_star2",  "open_rest",     "wi_commit",
                                  "wi_challenge",  "wi_response", "verdict"};
    return names[p.index()];
}

std::vector<uint8_t> serialize_payload(const Payload& p) {
    Writer w;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, MsgReceiverInit>) {
                w.bits(m.r_v.r);
            } else if constexpr (std::is_same_v<T, MsgCStar>) {
                w.bits(m.c_star.c);
                w.bits(m.r_p.r);
            } else if constexpr (std::is_same_v<T, MsgAlphaCommits>) {
                w.u16(static_cast<uint16_t>(m.commits.size()));
                for (const auto& c : m.commits) w.bits(c.c);
            } else if constexpr (std::is_same_v<T, MsgChallenge>) {
                w.bits(m.b);
            } else if constexpr (std::is_same_v<T, MsgOpenChosen>) {
                w.u16(static_cast<uint16_t>(m.openings.size()));
                for (const auto& o : m.openings) put_opening(w, o);
            } else if constexpr (std::is_same_v<T, MsgCStarStar>) {
                w.bits(m.c.c);
            } else if constexpr (std::is_same_v<T, MsgOpenRest>) {
                w.u16(static_cast<uint16_t>(m.openings.size()));
                for (const auto& o : m.openings) put_opening(w, o);
                w.bits(m.r_wi.r);
            } else if constexpr (std::is_same_v<T, MsgWiCommit>) {
                w.u16(static_cast<uint16_t>(m.commits.left.size()));
                for (const auto& c : m.commits.left) w.bits(c.c);
                for (const auto& c : m.commits.right) w.bits(c.c);
            } else if constexpr (std::is_same_v<T, MsgWiChallenge>) {
                w.bits(m.e);
            } else if constexpr (std::is_same_v<T, MsgWiResponse>) {
                w.u16(static_cast<uint16_t>(m.reps.size()));
                for (const auto& rep : m.reps) {
                    w.u8(static_cast<uint8_t>(rep.left_challenge));
                    put_blum_response(w, rep.left);
                    put_blum_response(w, rep.right);
                }
            } else if constexpr (std::is_same_v<T, MsgVerdict>) {
                w.u8(static_cast<uint8_t>(m.verdict.kind));
                w.u8(static_cast<uint8_t>(m.verdict.step));
            }
        },
        p);
    return w.out;
}

Payload parse_payload(const std::string& type, const std::vector<uint8_t>& bytes) {
    Reader r{bytes};
    Payload out;
    if (type == "receiver_init") {
        out = MsgReceiverInit{ReceiverMsg{r.bits()}};
    } else if (type == "c_star") {
        MsgCStar m;
        m.c_star.c = r.bits();
        m.r_p.r = r.bits();
        out = m;
    } else if (type == "alpha_commits") {
        MsgAlphaCommits m;
        uint16_t n = r.u16();
        m.commits.resize(n);
        for (auto& c : m.commits) c.c = r.bits();
        out = m;
    } else if (type == "challenge") {
        out = MsgChallenge{r.bits()};
    } else if (type == "open_chosen") {
        MsgOpenChosen m;
        uint16_t n = r.u16();
        m.openings.resize(n);
        for (auto& o : m.openings) o = get_opening(r);
        out = m;
    } else if (type == "c_star2") {
        MsgCStarStar m;
        m.c.c = r.bits();
        out = m;
    } else if (type == "open_rest") {
        MsgOpenRest m;
        uint16_t n = r.u16();
        m.openings.resize(n);
        for (auto& o : m.openings) o = get_opening(r);
        m.r_wi.r = r.bits();
        out = m;
    } else if (type == "wi_commit") {
        MsgWiCommit m;
        uint16_t t = r.u16();
        m.commits.left.resize(t);
        m.commits.right.resize(t);
        for (auto& c : m.commits.left) c.c = r.bits();
        for (auto& c : m.commits.right) c.c = r.bits();
        out = m;
    } else if (type == "wi_challenge") {
        out = MsgWiChallenge{r.bits()};
    } else if (type == "wi_response") {
        MsgWiResponse m;
        uint16_t t = r.u16();
        m.reps.resize(t);
        for (auto& rep : m.reps) {
            rep.left_challenge = r.u8() & 1;
            rep.left = get_blum_response(r);
            rep.right = get_blum_response(r);
        }
        out = m;
    } else if (type == "verdict") {
        MsgVerdict m;
        uint8_t kind = r.u8();
        if (kind > 2) throw FormatError("bad verdict kind");
        m.verdict.kind = static_cast<VerdictKind>(kind);
        m.verdict.step = r.u8();
        out = m;
    } else {
        throw FormatError("unknown message type: " + type);
    }
    r.done();
    return out;
}

int expected_round(const Payload& p) {
    return static_cast<int>(p.index()) + 1;
}

const char* round_type_name(int round) {
    static const char* names[] = {"receiver_init", "c_star",   "alpha_commits", "challenge",
                                  "open_chosen",   "c_star2",  "open_rest",     "wi_commit",
                                  "wi_challenge",  "wi_response", "verdict"};
    if (round < 1 || round > 11) throw FormatError("round out of range");
    return names[round - 1];
}

}  // namespace

std::vector<uint8_t> payload_to_bytes(const Payload& p) { return serialize_payload(p); }

Payload payload_from_bytes(int round, const std::vector<uint8_t>& bytes) {
    return parse_payload(round_type_name(round), bytes);
}

std::vector<uint8_t> encode_msg(const ProtocolMsg& msg) {
    nlohmann::json j;
    j["session_id"] = msg.session_id;
    j["round"] = msg.round;
    j["dir"] = (msg.dir == Dir::ProverToVerifier) ? "p2v" : "v2p";
    j["type"] = type_name(msg.payload);
    j["payload_hex"] = to_hex(serialize_payload(msg.payload));
    const std::string body = j.dump();
    if (body.size() > 0xffffffffull) throw FrameError("frame too large");
    std::vector<uint8_t> out;
    out.reserve(4 + body.size());
    for (int i = 3; i >= 0; --i) out.push_back((body.size() >> (8 * i)) & 0xff);
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

ProtocolMsg decode_msg(const std::vector<uint8_t>& frame) {
    if (frame.size() < 4) throw FrameError("frame shorter than the length header");
    uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len = (len << 8) | frame[i];
    if (frame.size() != 4 + static_cast<size_t>(len)) throw FrameError("frame length mismatch");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(frame.begin() + 4, frame.end());
    } catch (const nlohmann::json::exception&) {
        throw FrameError("frame body is not valid JSON");
    }
    ProtocolMsg msg;
    try {
        msg.session_id = j.at("session_id").get<uint64_t>();
        msg.round = j.at("round").get<int>();
        const std::string dir = j.at("dir").get<std::string>();
        if (dir == "p2v")
            msg.dir = Dir::ProverToVerifier;
        else if (dir == "v2p")
            msg.dir = Dir::VerifierToProver;
        else
            throw FormatError("bad direction");
        msg.payload = parse_payload(j.at("type").get<std::string>(),
                                    from_hex(j.at("payload_hex").get<std::string>()));
    } catch (const nlohmann::json::exception&) {
        throw FormatError("frame fields missing or mistyped");
    }
    if (msg.round != expected_round(msg.payload)) throw FormatError("round/type mismatch");
    return msg;
}

// ---------------------------------------------------------------------------
// Helpers shared with hand-rolled parties.

Commitment make_c_star(const ReceiverMsg& r_v, const Bits& r_star, std::vector<Bits>* seeds,
                       Rng& rng) {
    seeds->resize(r_star.size());
    for (auto& s : *seeds) s = random_bits(r_star.size(), rng);
    return commit_string(r_v, r_star, *seeds);
}

Commitment make_c_star_star(const ReceiverMsg& r_v, int lambda, const Bits& payload,
                            const Bits& r_star) {
    if (static_cast<int>(payload.size()) != trapdoor_payload_bits(lambda))
        throw FormatError("payload width mismatch");
    return commit_string(r_v, payload, derive_seeds(r_star, payload.size()));
}

WiInstance assemble_wi_instance(const Graph& x, int lambda, const Commitment& c_star,
                                const Commitment& c_star_star,
                                const std::vector<std::array<Bits, 2>>& alphas,
                                const ReceiverMsg& r_v) {
    return WiInstance{x, c_star, c_star_star, alphas, r_v, lambda};
}

// ---------------------------------------------------------------------------
// Prover.

ProverSession::ProverSession(Graph x, std::optional<std::vector<int>> witness,
                             ProtocolParams params, uint64_t session_id, Rng rng)
    : x_(std::move(x)), witness_(std::move(witness)), params_(params), session_id_(session_id),
      rng_(rng) {
    // r* exists before the first verifier byte arrives.
    r_star_ = random_bits(params_.lambda, rng_);
}

StepResult ProverSession::on_message(const ProtocolMsg& msg) {
    if (msg.session_id != session_id_) throw ProtocolError("session id mismatch");
    if (msg.dir != Dir::VerifierToProver) throw ProtocolError("prover received a prover message");
    if (msg.round != next_round_)
        throw ProtocolError("out-of-order message at round " + std::to_string(msg.round));
    const int lambda = params_.lambda;

    switch (msg.round) {
        case 1: {
            const auto& m = std::get<MsgReceiverInit>(msg.payload);
            if (m.r_v.r.size() != 3 * static_cast<size_t>(lambda))
                throw ProtocolError("receiver message has the wrong length");
            r_v_ = m.r_v;
            c_star_ = make_c_star(r_v_, r_star_, &r_seeds_, rng_);
            r_p_ = sample_receiver_msg(lambda, rng_);
            next_round_ = 3;
            return {ProtocolMsg{session_id_, 2, Dir::ProverToVerifier,
                                MsgCStar{c_star_, r_p_}},
                    std::nullopt};
        }
        case 3: {
            const auto& m = std::get<MsgAlphaCommits>(msg.payload);
            if (m.commits.size() != 2 * static_cast<size_t>(lambda))
                throw ProtocolError("alpha commitment batch has the wrong shape");
            alpha_commits_ = m.commits;
            challenge_ = random_bits(lambda, rng_);
            alphas_.assign(lambda, {Bits(), Bits()});
            next_round_ = 5;
            return {ProtocolMsg{session_id_, 4, Dir::ProverToVerifier, MsgChallenge{challenge_}},
                    std::nullopt};
        }
        case 5: {
            const auto& m = std::get<MsgOpenChosen>(msg.payload);
            if (m.openings.size() != static_cast<size_t>(lambda))
                return {std::nullopt, Verdict{VerdictKind::Reject, 4}};
            for (int i = 0; i < lambda; ++i) {
                const Opening& o = m.openings[i];
                if (static_cast<int>(o.message.size()) != lambda ||
                    !verify_open(r_p_, alpha_commits_[2 * i + challenge_[i]], o))
                    return {std::nullopt, Verdict{VerdictKind::Reject, 4}};
                alphas_[i][challenge_[i]] = o.message;
            }
            const Bits payload(trapdoor_payload_bits(lambda), 0);
            c_star_star_ = make_c_star_star(r_v_, lambda, payload, r_star_);
            next_round_ = 7;
            return {ProtocolMsg{session_id_, 6, Dir::ProverToVerifier, MsgCStarStar{c_star_star_}},
                    std::nullopt};
        }
        case 7: {
            const auto& m = std::get<MsgOpenRest>(msg.payload);
            if (m.openings.size() != static_cast<size_t>(lambda))
                return {std::nullopt, Verdict{VerdictKind::Reject, 6}};
            for (int i = 0; i < lambda; ++i) {
                const Opening& o = m.openings[i];
                const int other = 1 - challenge_[i];
                if (static_cast<int>(o.message.size()) != lambda ||
                    !verify_open(r_p_, alpha_commits_[2 * i + other], o))
                    return {std::nullopt, Verdict{VerdictKind::Reject, 6}};
                alphas_[i][other] = o.message;
            }
            if (m.r_wi.r.size() != 3 * static_cast<size_t>(lambda))
                return {std::nullopt, Verdict{VerdictKind::Reject, 6}};
            WiInstance xwi =
                assemble_wi_instance(x_, lambda, c_star_, c_star_star_, alphas_, r_v_);
            wi_inst_ = wi_or_instance(xwi);
            WiOrWitness which = WiOrWitness::None;
            if (witness_ && is_hamiltonian_cycle(x_, *witness_))
                which = WiOrWitness::Left;
            else if (wi_inst_.right_cycle)
                which = WiOrWitness::Right;
            MsgWiCommit commit_msg;
            wi_state_ = wi_or_commit(wi_inst_, which, witness_, params_.wi_reps, m.r_wi, rng_,
                                     &commit_msg.commits);
            next_round_ = 9;
            return {ProtocolMsg{session_id_, 8, Dir::ProverToVerifier, std::move(commit_msg)},
                    std::nullopt};
        }
        case 9: {
            const auto& m = std::get<MsgWiChallenge>(msg.payload);
            if (static_cast<int>(m.e.size()) != params_.wi_reps)
                throw ProtocolError("wi challenge has the wrong length");
            MsgWiResponse resp;
            resp.reps = wi_or_respond(wi_state_, m.e);
            next_round_ = 11;
            return {ProtocolMsg{session_id_, 10, Dir::ProverToVerifier, std::move(resp)},
                    std::nullopt};
        }
        case 11: {
            const auto& m = std::get<MsgVerdict>(msg.payload);
            next_round_ = -1;
            return {std::nullopt, m.verdict};
        }
        default:
            throw ProtocolError("prover cannot handle round " + std::to_string(msg.round));
    }
}

// ---------------------------------------------------------------------------
// Verifier.

VerifierSession::VerifierSession(Graph x, ProtocolParams params, uint64_t session_id, Rng rng)
    : x_(std::move(x)), params_(params), session_id_(session_id), rng_(rng) {
    const int lambda = params_.lambda;
    r_v_ = sample_receiver_msg(lambda, rng_);
    r_wi_ = sample_receiver_msg(lambda, rng_);
    alphas_.resize(lambda);
    alpha_seeds_.resize(lambda);
    for (int i = 0; i < lambda; ++i)
        for (int b = 0; b < 2; ++b) {
            alphas_[i][b] = random_bits(lambda, rng_);
            alpha_seeds_[i][b].resize(lambda);
            for (auto& s : alpha_seeds_[i][b]) s = random_bits(lambda, rng_);
        }
}

ProtocolMsg VerifierSession::start() {
    return ProtocolMsg{session_id_, 1, Dir::VerifierToProver, MsgReceiverInit{r_v_}};
}

StepResult VerifierSession::on_message(const ProtocolMsg& msg) {
    if (msg.session_id != session_id_) throw ProtocolError("session id mismatch");
    if (msg.dir != Dir::ProverToVerifier)
        throw ProtocolError("verifier received a verifier message");
    if (msg.round != next_round_)
        throw ProtocolError("out-of-order message at round " + std::to_string(msg.round));
    const int lambda = params_.lambda;

    switch (msg.round) {
        case 2: {
            const auto& m = std::get<MsgCStar>(msg.payload);
            if (m.c_star.c.size() != 3 * static_cast<size_t>(lambda) * lambda)
                throw ProtocolError("c* has the wrong length");
            if (m.r_p.r.size() != 3 * static_cast<size_t>(lambda))
                throw ProtocolError("prover receiver message has the wrong length");
            c_star_ = m.c_star;
            r_p_ = m.r_p;
            if (abort_step_ == 2) return {std::nullopt, Verdict{VerdictKind::Abort, 2}};
            MsgAlphaCommits out;
            out.commits.resize(2 * lambda);
            for (int i = 0; i < lambda; ++i)
                for (int b = 0; b < 2; ++b)
                    out.commits[2 * i + b] = commit_string(r_p_, alphas_[i][b], alpha_seeds_[i][b]);
            alpha_commits_ = out.commits;
            next_round_ = 4;
            return {ProtocolMsg{session_id_, 3, Dir::VerifierToProver, std::move(out)},
                    std::nullopt};
        }
        case 4: {
            const auto& m = std::get<MsgChallenge>(msg.payload);
            if (static_cast<int>(m.b.size()) != lambda)
                throw ProtocolError("challenge has the wrong length");
            challenge_ = m.b;
            if (abort_step_ == 4) return {std::nullopt, Verdict{VerdictKind::Abort, 4}};
            MsgOpenChosen out;
            out.openings.resize(lambda);
            for (int i = 0; i < lambda; ++i)
                out.openings[i] = Opening{alphas_[i][challenge_[i]], alpha_seeds_[i][challenge_[i]]};
            next_round_ = 6;
            return {ProtocolMsg{session_id_, 5, Dir::VerifierToProver, std::move(out)},
                    std::nullopt};
        }
        case 6: {
            const auto& m = std::get<MsgCStarStar>(msg.payload);
            const size_t want =
                3 * static_cast<size_t>(lambda) * trapdoor_payload_bits(lambda);
            if (m.c.c.size() != want) throw ProtocolError("c** has the wrong length");
            c_star_star_ = m.c;
            if (abort_step_ == 6) return {std::nullopt, Verdict{VerdictKind::Abort, 6}};
            MsgOpenRest out;
            out.openings.resize(lambda);
            for (int i = 0; i < lambda; ++i) {
                const int other = 1 - challenge_[i];
                out.openings[i] = Opening{alphas_[i][other], alpha_seeds_[i][other]};
            }
            out.r_wi = r_wi_;
            next_round_ = 8;
            return {ProtocolMsg{session_id_, 7, Dir::VerifierToProver, std::move(out)},
                    std::nullopt};
        }
        case 8: {
            const auto& m = std::get<MsgWiCommit>(msg.payload);
            if (static_cast<int>(m.commits.left.size()) != params_.wi_reps ||
                static_cast<int>(m.commits.right.size()) != params_.wi_reps)
                throw ProtocolError("wi commitment batch has the wrong shape");
            wi_commits_ = m.commits;
            wi_challenge_ = random_bits(params_.wi_reps, rng_);
            next_round_ = 10;
            return {ProtocolMsg{session_id_, 9, Dir::VerifierToProver,
                                MsgWiChallenge{wi_challenge_}},
                    std::nullopt};
        }
        case 10: {
            const auto& m = std::get<MsgWiResponse>(msg.payload);
            WiInstance xwi =
                assemble_wi_instance(x_, lambda, c_star_, c_star_star_, alphas_, r_v_);
            WiOrInstance inst = wi_or_instance(xwi);
            const bool ok =
                wi_or_check(inst, r_wi_, wi_commits_, wi_challenge_, m.reps);
            Verdict verdict =
                ok ? Verdict{VerdictKind::Accept, 7} : Verdict{VerdictKind::Reject, 7};
            next_round_ = -1;
            return {ProtocolMsg{session_id_, 11, Dir::VerifierToProver, MsgVerdict{verdict}},
                    verdict};
        }
        default:
            throw ProtocolError("verifier cannot handle round " + std::to_string(msg.round));
    }
}

// ---------------------------------------------------------------------------
// Drivers.

Transcript run_session(ProverSession prover, VerifierSession verifier) {
    Transcript tr;
    ProtocolMsg current = verifier.start();
    tr.messages.push_back(current);
    bool prover_turn = true;
    for (int guard = 0; guard < 64; ++guard) {
        StepResult res = prover_turn ? prover.on_message(current) : verifier.on_message(current);
        if (res.reply) {
            tr.messages.push_back(*res.reply);
            current = std::move(*res.reply);
            prover_turn = !prover_turn;
            if (res.verdict) {
                // Verifier decided and still emitted the verdict message; let
                // the prover consume it so both sides agree.
                if (!prover_turn) throw ProtocolError("verdict emitted by the wrong party");
                (void)prover.on_message(current);
                tr.verdict = *res.verdict;
                return tr;
            }
            continue;
        }
        if (res.verdict) {
            tr.verdict = *res.verdict;
            return tr;
        }
        throw ProtocolError("party returned neither reply nor verdict");
    }
    throw ProtocolError("session did not terminate");
}

// ---------------------------------------------------------------------------
// Transcript replay.

namespace {

const ProtocolMsg* find_round(const Transcript& tr, int round) {
    for (const auto& m : tr.messages)
        if (m.round == round) return &m;
    return nullptr;
}

}  // namespace

Verdict replay_transcript(const Graph& x, const ProtocolParams& params, const Transcript& tr) {
    const int lambda = params.lambda;
    // Structure: rounds strictly increasing, directions alternating per map.
    int prev = 0;
    for (const auto& m : tr.messages) {
        if (m.round <= prev) throw ProtocolError("rounds do not increase");
        if (m.round != expected_round(m.payload)) throw ProtocolError("type/round mismatch");
        const bool is_p2v = (m.round % 2 == 0);
        if (is_p2v != (m.dir == Dir::ProverToVerifier)) throw ProtocolError("direction mismatch");
        prev = m.round;
    }
    auto* m1 = find_round(tr, 1);
    auto* m2 = find_round(tr, 2);
    auto* m3 = find_round(tr, 3);
    auto* m4 = find_round(tr, 4);
    auto* m5 = find_round(tr, 5);
    auto* m6 = find_round(tr, 6);
    auto* m7 = find_round(tr, 7);
    auto* m8 = find_round(tr, 8);
    auto* m9 = find_round(tr, 9);
    auto* m10 = find_round(tr, 10);
    if (!m1 || !m2 || !m3 || !m4) return Verdict{VerdictKind::Abort, m1 ? (m2 ? 2 : 1) : 1};
    const auto& r_v = std::get<MsgReceiverInit>(m1->payload).r_v;
    const auto& cstar_msg = std::get<MsgCStar>(m2->payload);
    const auto& commits = std::get<MsgAlphaCommits>(m3->payload).commits;
    const auto& challenge = std::get<MsgChallenge>(m4->payload).b;
    if (static_cast<int>(challenge.size()) != lambda) throw ProtocolError("challenge length");
    if (commits.size() != 2 * static_cast<size_t>(lambda)) throw ProtocolError("alpha batch");
    if (!m5) return Verdict{VerdictKind::Abort, 4};

    std::vector<std::array<Bits, 2>> alphas(lambda);
    const auto& chosen = std::get<MsgOpenChosen>(m5->payload).openings;
    if (chosen.size() != static_cast<size_t>(lambda)) return Verdict{VerdictKind::Reject, 4};
    for (int i = 0; i < lambda; ++i) {
        if (static_cast<int>(chosen[i].message.size()) != lambda ||
            !verify_open(cstar_msg.r_p, commits[2 * i + challenge[i]], chosen[i]))
            return Verdict{VerdictKind::Reject, 4};
        alphas[i][challenge[i]] = chosen[i].message;
    }
    if (!m6) return Verdict{VerdictKind::Abort, 5};
    if (!m7) return Verdict{VerdictKind::Abort, 6};
    const auto& rest_msg = std::get<MsgOpenRest>(m7->payload);
    if (rest_msg.openings.size() != static_cast<size_t>(lambda))
        return Verdict{VerdictKind::Reject, 6};
    for (int i = 0; i < lambda; ++i) {
        const int other = 1 - challenge[i];
        if (static_cast<int>(rest_msg.openings[i].message.size()) != lambda ||
            !verify_open(cstar_msg.r_p, commits[2 * i + other], rest_msg.openings[i]))
            return Verdict{VerdictKind::Reject, 6};
        alphas[i][other] = rest_msg.openings[i].message;
    }
    if (!m8 || !m9 || !m10) return Verdict{VerdictKind::Abort, 7};
    WiInstance xwi = assemble_wi_instance(
        x, lambda, cstar_msg.c_star, std::get<MsgCStarStar>(m6->payload).c, alphas, r_v);
    WiOrInstance inst = wi_or_instance(xwi);
    const bool ok = wi_or_check(inst, rest_msg.r_wi, std::get<MsgWiCommit>(m8->payload).commits,
                                std::get<MsgWiChallenge>(m9->payload).e,
                                std::get<MsgWiResponse>(m10->payload).reps);
    return ok ? Verdict{VerdictKind::Accept, 7} : Verdict{VerdictKind::Reject, 7};
}

// ---------------------------------------------------------------------------
// Verifier state snapshot encoding.

struct VerifierStateCodec {
    static std::vector<uint8_t> save(const VerifierSession& v) {
        Writer w;
        w.bytes(v.x_.serialize());
        w.u16(static_cast<uint16_t>(v.params_.lambda));
        w.u16(static_cast<uint16_t>(v.params_.wi_reps));
        w.u64(v.session_id_);
        std::ostringstream rng_text;
        rng_text << v.rng_;
        const std::string rng_str = rng_text.str();
        w.bytes(std::vector<uint8_t>(rng_str.begin(), rng_str.end()));
        w.u16(static_cast<uint16_t>(v.next_round_ < 0 ? 0xffff : v.next_round_));
        w.u16(static_cast<uint16_t>(v.abort_step_));
        w.bits(v.r_v_.r);
        w.bits(v.r_p_.r);
        w.bits(v.r_wi_.r);
        for (const auto& pair : v.alphas_)
            for (const auto& a : pair) w.bits(a);
        for (const auto& pair : v.alpha_seeds_)
            for (const auto& seeds : pair) {
                w.u16(static_cast<uint16_t>(seeds.size()));
                for (const auto& s : seeds) w.bits(s);
            }
        w.bits(v.c_star_.c);
        w.bits(v.c_star_star_.c);
        w.u16(static_cast<uint16_t>(v.alpha_commits_.size()));
        for (const auto& c : v.alpha_commits_) w.bits(c.c);
        w.bits(v.challenge_);
        w.bits(v.wi_challenge_);
        w.u16(static_cast<uint16_t>(v.wi_commits_.left.size()));
        for (const auto& c : v.wi_commits_.left) w.bits(c.c);
        for (const auto& c : v.wi_commits_.right) w.bits(c.c);
        return w.out;
    }

    static VerifierSession load(const std::vector<uint8_t>& bytes) {
        Reader r{bytes};
        Graph x = Graph::deserialize(r.bytes());
        ProtocolParams params;
        params.lambda = r.u16();
        params.wi_reps = r.u16();
        const uint64_t sid = r.u64();
        auto rng_bytes = r.bytes();
        VerifierSession v(x, params, sid, Rng(0));
        std::istringstream rng_text(std::string(rng_bytes.begin(), rng_bytes.end()));
        rng_text >> v.rng_;
        if (!rng_text) throw FormatError("bad rng state");
        const uint16_t round = r.u16();
        v.next_round_ = (round == 0xffff) ? -1 : round;
        v.abort_step_ = r.u16();
        v.r_v_.r = r.bits();
        v.r_p_.r = r.bits();
        v.r_wi_.r = r.bits();
        v.alphas_.assign(params.lambda, {Bits(), Bits()});
        for (auto& pair : v.alphas_)
            for (auto& a : pair) a = r.bits();
        v.alpha_seeds_.assign(params.lambda, {});
        for (auto& pair : v.alpha_seeds_)
            for (auto& seeds : pair) {
                seeds.resize(r.u16());
                for (auto& s : seeds) s = r.bits();
            }
        v.c_star_.c = r.bits();
        v.c_star_star_.c = r.bits();
        v.alpha_commits_.resize(r.u16());
        for (auto& c : v.alpha_commits_) c.c = r.bits();
        v.challenge_ = r.bits();
        v.wi_challenge_ = r.bits();
        const uint16_t wt = r.u16();
        v.wi_commits_.left.resize(wt);
        v.wi_commits_.right.resize(wt);
        for (auto& c : v.wi_commits_.left) c.c = r.bits();
        for (auto& c : v.wi_commits_.right) c.c = r.bits();
        r.done();
        return v;
    }
};

std::vector<uint8_t> VerifierSession::save_state() const { return VerifierStateCodec::save(*this); }

VerifierSession VerifierSession::load_state(const std::vector<uint8_t>& bytes) {
    return VerifierStateCodec::load(bytes);
}

}  // namespace qzk
