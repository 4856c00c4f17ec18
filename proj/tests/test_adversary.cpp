#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qzk/adversary.hpp"
#include "qzk/stats.hpp"

using namespace qzk;

namespace {

ProtocolParams demo_params() {
    ProtocolParams p;
    p.lambda = 8;
    p.wi_reps = 12;
    return p;
}

}  // namespace

TEST_CASE("the zoo has the required inhabitants") {
    auto zoo = build_zoo(3);
    REQUIRE(zoo.size() >= 6);
    std::vector<std::string> names;
    for (const auto& z : zoo) names.push_back(z.spec.name);
    for (const char* want : {"honest", "always_abort", "never_abort", "bit_conditional",
                             "quantum_coin", "delayed_abort"})
        CHECK(std::find(names.begin(), names.end(), want) != names.end());
}

TEST_CASE("bit-conditional zoo verifier aborts exactly on the watched bit") {
    auto zoo = build_zoo(2);
    const auto& bit_cond =
        *std::find_if(zoo.begin(), zoo.end(), [](const ZooVerifier& z) {
            return z.spec.name == "bit_conditional";
        });
    Rng rng(1);
    int aborts = 0;
    const int runs = 600;
    for (int r = 0; r < runs; ++r) {
        auto oracle = make_oracle(bit_cond.spec, Graph::complete(4), demo_params(), r);
        RealResult real = run_real_session(Graph::complete(4), *oracle,
                                           std::vector<int>{0, 1, 2, 3}, demo_params(), rng);
        const bool aborted = real.abort_step == 4;
        if (aborted) ++aborts;
        // The abort is fully determined by the watched challenge bit.
        if (!real.challenges.empty()) CHECK(aborted == (real.challenges[0] == 1));
    }
    CHECK(std::abs(aborts / static_cast<double>(runs) - 0.5) < 3 * std::sqrt(0.25 / runs));
}

TEST_CASE("quantum-coin zoo verifier at cos^2 = 0.7 measures p = 0.7") {
    auto zoo = build_zoo(3);
    const auto& coin = *std::find_if(zoo.begin(), zoo.end(), [](const ZooVerifier& z) {
        return z.spec.name == "quantum_coin";
    });
    Rng rng(2);
    int ok = 0;
    const int runs = 2000;
    for (int r = 0; r < runs; ++r) {
        auto oracle = make_oracle(coin.spec, Graph::complete(4), demo_params(), 10 + r);
        RealResult real = run_real_session(Graph::complete(4), *oracle,
                                           std::vector<int>{0, 1, 2, 3}, demo_params(), rng);
        if (real.abort_step == 0) ++ok;
    }
    CHECK(std::abs(ok / static_cast<double>(runs) - 0.7) < 0.03);
}

TEST_CASE("always-abort zoo member sends the simulator home with zero iterations") {
    auto zoo = build_zoo(2);
    const auto& aa = *std::find_if(zoo.begin(), zoo.end(), [](const ZooVerifier& z) {
        return z.spec.name == "always_abort";
    });
    Rng rng(3);
    auto oracle = make_oracle(aa.spec, Graph::complete(4), demo_params(), 5);
    SimResult res = simulate(Graph::complete(4), *oracle, demo_params(), rng);
    CHECK(res.status == SimStatus::VerifierAborted);
    CHECK(res.iterations == 0);
}

TEST_CASE("guessing prover on a no-instance wins about 2^-lambda, under lambda/2^lambda") {
    const ProtocolParams params = demo_params();
    Rng rng(4);
    long wins = 0;
    const long runs = 4000;
    for (long r = 0; r < runs; ++r)
        if (run_guessing_prover(Graph::bowtie(), params, rng).kind == VerdictKind::Accept) ++wins;
    const double rate = wins / static_cast<double>(runs);
    const double exact = std::pow(2.0, -params.lambda);
    const double ceiling = params.lambda * exact;
    CHECK(rate <= ceiling + three_sigma(ceiling, runs));
    CHECK(rate <= exact + 3 * std::sqrt(exact * (1 - exact) / runs) + 1e-9);
}

TEST_CASE("mauling prover never satisfies the trapdoor branch") {
    const ProtocolParams params = demo_params();
    Rng rng(5);
    long wins = 0;
    const long runs = 500;
    for (long r = 0; r < runs; ++r)
        if (run_mauling_prover(Graph::bowtie(), params, rng).kind == VerdictKind::Accept) ++wins;
    // Success would need either a trapdoor hit (blocked by the r* binding) or
    // a full WI cheat at 2^-12.
    CHECK(wins == 0);
}

TEST_CASE("query log consistency: non-abort implies state-successful") {
    Rng rng(6);
    for (int r = 0; r < 20; ++r) {
        auto probe = run_probe_policy(static_cast<ProbePolicy>(r % 4), Graph::complete(4),
                                      std::vector<int>{0, 1, 2, 3}, demo_params(), 6, rng);
        for (const auto& rec : probe.log.records)
            if (rec.non_abort) CHECK(rec.state_successful);
    }
}

TEST_CASE("honest in-order driving of V' yields zero events and an accept") {
    Rng rng(7);
    for (int r = 0; r < 40; ++r) {
        auto probe = run_probe_policy(ProbePolicy::StraightLine, Graph::complete(4),
                                      std::vector<int>{0, 1, 2, 3}, demo_params(), 6, rng);
        CHECK(probe.success);
        CHECK(probe.events.total() == 0);
        CHECK(probe.log.records.size() == 6);
    }
}

TEST_CASE("synthetic logs classify into the advertised events") {
    QueryLog log;
    // Two state-successes at channel 2 -> B_2 = 1 (the second entry).
    log.records.push_back({2, true, false, {}, {}, 0});
    log.records.push_back({2, true, false, {}, {}, 1});
    // A state-success at channel 3 with no prior non-abort at 2 -> J_3.
    log.records.push_back({3, true, false, {}, {}, 2});
    // A success at channel 1 after channel 3 fired -> C.
    log.records.push_back({1, true, false, {}, {}, 3});
    EventCounters ev = classify_queries(log, 6, false);
    CHECK(ev.b[2] == 1);
    CHECK(ev.j[3] == 1);
    CHECK(ev.j[2] == 2);  // both channel-2 queries lacked a non-abort at 1
    CHECK(ev.c >= 1);
    CHECK(ev.d == 0);

    // In-order single-pass log: all counters zero.
    QueryLog clean;
    std::vector<uint8_t> z_prev;
    for (int i = 0; i < 6; ++i) {
        std::vector<uint8_t> z_next{static_cast<uint8_t>(i)};
        clean.records.push_back({i, true, true, z_prev, z_next, i});
        z_prev = z_next;
    }
    EventCounters ev_clean = classify_queries(clean, 6, true);
    CHECK(ev_clean.total() == 0);

    // Success without any non-abort at channel 4 -> E.
    QueryLog gap = clean;
    gap.records.erase(gap.records.begin() + 4);
    EventCounters ev_gap = classify_queries(gap, 6, true);
    CHECK(ev_gap.e >= 1);
}

TEST_CASE("out-of-order probes pass the subspace check at the 2^{-n/2} floor") {
    Rng rng(8);
    const int n = 6;
    long attempts = 0, successes = 0;
    for (int r = 0; r < 800; ++r) {
        auto probe = run_probe_policy(ProbePolicy::OutOfOrder, Graph::complete(4),
                                      std::vector<int>{0, 1, 2, 3}, demo_params(), n, rng);
        attempts += probe.probe_attempts;
        successes += probe.probe_state_successes;
        // The straight-line tail still completes.
        CHECK(probe.success);
    }
    const double rate = successes / static_cast<double>(attempts);
    const double floor = std::pow(2.0, -n / 2.0);
    CHECK(rate <= floor + three_sigma(floor, attempts));
    CHECK(rate >= floor - three_sigma(floor, attempts));  // |0^n> overlaps exactly 2^-k
}

TEST_CASE("repeat-query clones pass at the overlap floor; B events are rare") {
    Rng rng(9);
    const int n = 6;
    long attempts = 0, successes = 0, b_events = 0;
    for (int r = 0; r < 600; ++r) {
        auto probe = run_probe_policy(ProbePolicy::RepeatQuery, Graph::complete(4),
                                      std::vector<int>{0, 1, 2, 3}, demo_params(), n, rng);
        attempts += probe.probe_attempts;
        successes += probe.probe_state_successes;
        for (long bcount : probe.events.b) b_events += bcount;
    }
    const double rate = successes / static_cast<double>(attempts);
    const double floor = std::pow(2.0, -n / 2.0);
    CHECK(rate <= floor + three_sigma(floor, attempts));
    // A B event needs both clone attempts to pass: the 2^-n floor.
    const double b_floor = std::pow(2.0, -n);
    const long runs = attempts / 2;
    CHECK(b_events <= runs * b_floor + 3 * std::sqrt(runs * b_floor * (1 - b_floor)) + 1);
}

TEST_CASE("skip-query probes fail against the fresh subspace") {
    Rng rng(10);
    const int n = 6;
    long attempts = 0, successes = 0;
    for (int r = 0; r < 400; ++r) {
        auto probe = run_probe_policy(ProbePolicy::SkipQuery, Graph::complete(4),
                                      std::vector<int>{0, 1, 2, 3}, demo_params(), n, rng);
        attempts += probe.probe_attempts;
        successes += probe.probe_state_successes;
    }
    // |<S_2|S_1>|^2 for random half-dimension subspaces is tiny but nonzero.
    CHECK(successes <= attempts / 8);
}

TEST_CASE("forged tags never produce D events") {
    Rng rng(11);
    long d = count_forged_tag_events(Graph::complete(4), demo_params(), 6, 3000, rng);
    CHECK(d == 0);
}

TEST_CASE("extracted prover: accepts on yes-instances, rejects on no-instances") {
    const ProtocolParams params = demo_params();
    Rng rng(12);
    int yes_accept = 0, no_accept = 0;
    const int runs = 60;
    for (int r = 0; r < runs; ++r) {
        auto yes = run_extracted_prover(Graph::complete(4), std::vector<int>{0, 1, 2, 3}, params,
                                        6, false, rng);
        if (yes.verdict.kind == VerdictKind::Accept) ++yes_accept;
        CHECK(!yes.policy_deviated);
        CHECK(yes.events.total() == 0);
        auto no = run_extracted_prover(Graph::bowtie(), std::nullopt, params, 6, false, rng);
        if (no.verdict.kind == VerdictKind::Accept) ++no_accept;
    }
    CHECK(yes_accept == runs);
    CHECK(no_accept == 0);
}

TEST_CASE("ciphertext swap: internal-gamma and enc-zero worlds look alike") {
    const ProtocolParams params = demo_params();
    auto observe = [&](bool internal, uint64_t seed) {
        Histogram h;
        Rng rng(seed);
        for (int r = 0; r < 500; ++r) {
            auto res = run_extracted_prover(Graph::complete(4), std::vector<int>{0, 1, 2, 3},
                                            params, 6, internal, rng);
            h.add(std::to_string(static_cast<int>(res.verdict.kind)) + "|" +
                  std::to_string(res.events.total()) + "|" +
                  std::to_string(res.policy_deviated));
        }
        return h;
    };
    Histogram real_gamma = observe(true, 500);
    Histogram enc_zero = observe(false, 501);
    auto [a, b] = Histogram::aligned(real_gamma, enc_zero);
    CHECK(chi2_two_sample_pvalue(a, b) > 1e-3);
}
