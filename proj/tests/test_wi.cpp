#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "qzk/stats.hpp"
#include "qzk/wi.hpp"

using namespace qzk;

namespace {

// Builds an honest-looking WiInstance. When `trapdoor` is set, c** commits the
// real (i*, alpha_{i*,0} xor alpha_{i*,1}) pair under seeds derived from r*;
// otherwise it commits the all-zero payload as the honest prover does.
struct MadeInstance {
    WiInstance xwi;
    TrapdoorWitness witness;
};

MadeInstance make_instance(const Graph& x, int lambda, bool trapdoor, Rng& rng) {
    MadeInstance out;
    out.xwi.x = x;
    out.xwi.lambda = lambda;
    out.xwi.receiver_for_prover = sample_receiver_msg(lambda, rng);
    out.witness.r_star = random_bits(lambda, rng);
    out.witness.r_seeds.resize(lambda);
    for (auto& s : out.witness.r_seeds) s = random_bits(lambda, rng);
    out.xwi.c_star =
        commit_string(out.xwi.receiver_for_prover, out.witness.r_star, out.witness.r_seeds);
    out.xwi.alphas.resize(lambda);
    for (auto& pair : out.xwi.alphas) {
        pair[0] = random_bits(lambda, rng);
        pair[1] = random_bits(lambda, rng);
    }
    out.witness.i_star = static_cast<int>(rng() % lambda);
    const int m = trapdoor_payload_bits(lambda);
    Bits payload(m, 0);
    if (trapdoor)
        payload = encode_trapdoor_payload(
            lambda, out.witness.i_star,
            xor_bits(out.xwi.alphas[out.witness.i_star][0], out.xwi.alphas[out.witness.i_star][1]));
    out.xwi.c_star_star = commit_string(out.xwi.receiver_for_prover, payload,
                                        derive_seeds(out.witness.r_star, m));
    return out;
}

std::string cycle_key(const std::vector<int>& cycle) {
    // Canonical form: rotate to start at 0 (direction preserved).
    auto it = std::find(cycle.begin(), cycle.end(), 0);
    std::string key;
    for (size_t i = 0; i < cycle.size(); ++i) {
        int v = cycle[(std::distance(cycle.begin(), it) + i) % cycle.size()];
        key += std::to_string(v) + ",";
    }
    return key;
}

}  // namespace

TEST_CASE("graph basics and serialization") {
    Graph k4 = Graph::complete(4);
    CHECK(k4.edge(0, 3));
    CHECK(!k4.edge(1, 1));
    CHECK_THROWS_AS(Graph(3).add_edge(0, 0), FormatError);
    auto bytes = k4.serialize();
    CHECK(Graph::deserialize(bytes) == k4);
    bytes[1] = 'X';
    CHECK_THROWS_AS(Graph::deserialize(bytes), FormatError);

    CHECK(is_hamiltonian_cycle(k4, {0, 1, 2, 3}));
    CHECK(!is_hamiltonian_cycle(k4, {0, 1, 2, 2}));
    CHECK(!is_hamiltonian_cycle(Graph::bowtie(), {0, 1, 2, 3, 4}));
    CHECK(find_hamiltonian_cycle(Graph::complete(4)).has_value());
    CHECK(!find_hamiltonian_cycle(Graph::bowtie()).has_value());
    CHECK(find_hamiltonian_cycle(Graph::cycle_graph(3)).has_value());
}

TEST_CASE("circuit construction validates wiring") {
    CHECK_THROWS_AS(BoolCircuit(1, {CircuitGate{CircuitOp::Not, 5, 0}}, 0), FormatError);
    CircuitBuilder cb(2);
    int w = cb.f_and(cb.input(0), cb.f_not(cb.input(1)));
    BoolCircuit c = cb.finish(w);
    CHECK(c.eval({1, 0}));
    CHECK(!c.eval({1, 1}));
    CHECK_THROWS_AS(c.eval({1}), FormatError);
}

TEST_CASE("prg_circuit mirrors prg_expand bit for bit") {
    Rng rng(41);
    for (int lambda : {4, 8, 16}) {
        for (int trial = 0; trial < 10; ++trial) {
            Bits seed = random_bits(lambda, rng);
            const size_t out_len = 3 * static_cast<size_t>(lambda);
            CircuitBuilder cb(lambda);
            std::vector<int> seed_wires(lambda);
            std::iota(seed_wires.begin(), seed_wires.end(), 0);
            auto out_wires = prg_circuit(cb, seed_wires, out_len);
            Bits expect = prg_expand(seed, out_len);
            // Evaluate every output wire through a one-output circuit.
            for (size_t j = 0; j < out_len; j += 7) {
                BoolCircuit c = cb.finish(out_wires[j]);
                CHECK(c.eval(seed) == (expect[j] != 0));
            }
        }
    }
}

TEST_CASE("compound circuit: honest witness satisfies the left branch") {
    Rng rng(42);
    const Graph x = Graph::complete(4);
    auto made = make_instance(x, 4, false, rng);
    CompoundLayout layout;
    BoolCircuit c = build_compound_circuit(made.xwi, &layout);
    CHECK(c.eval(left_assignment(layout, {0, 1, 2, 3})));
    CHECK(c.eval(left_assignment(layout, {0, 2, 1, 3})));
}

TEST_CASE("compound circuit: trapdoor witness satisfies the right branch") {
    Rng rng(43);
    const Graph x = Graph::bowtie();  // left branch unsatisfiable
    auto made = make_instance(x, 4, true, rng);
    CompoundLayout layout;
    BoolCircuit c = build_compound_circuit(made.xwi, &layout);
    CHECK(c.eval(trapdoor_assignment(layout, made.witness)));
}

TEST_CASE("compound circuit: garbage on both branches fails") {
    Rng rng(44);
    const Graph x = Graph::bowtie();
    auto made = make_instance(x, 4, false, rng);
    CompoundLayout layout;
    BoolCircuit c = build_compound_circuit(made.xwi, &layout);
    CHECK(!c.eval(Bits(layout.total, 0)));
    for (int t = 0; t < 20; ++t) CHECK(!c.eval(random_bits(layout.total, rng)));
    // A bad alpha table shape is rejected outright.
    WiInstance broken = made.xwi;
    broken.alphas.pop_back();
    CHECK_THROWS_AS(build_compound_circuit(broken, nullptr), FormatError);
}

TEST_CASE("decide_trapdoor recovers the planted witness and rejects honest instances") {
    Rng rng(45);
    for (int lambda : {4, 8}) {
        for (int t = 0; t < 10; ++t) {
            auto with = make_instance(Graph::complete(4), lambda, true, rng);
            auto w = decide_trapdoor(with.xwi);
            REQUIRE(w.has_value());
            CHECK(w->i_star == with.witness.i_star);
            CHECK(w->r_star == with.witness.r_star);

            // An honest zero payload decodes to (0, 0^lambda); the statement
            // then holds only in the 2^-lambda event alpha_{0,0} = alpha_{0,1}.
            auto without = make_instance(Graph::complete(4), lambda, false, rng);
            const bool vacuous_truth = without.xwi.alphas[0][0] == without.xwi.alphas[0][1];
            CHECK(decide_trapdoor(without.xwi).has_value() == vacuous_truth);
        }
    }
}

TEST_CASE("decide_trapdoor agrees with the compound circuit on the right branch") {
    Rng rng(46);
    for (int t = 0; t < 6; ++t) {
        const bool plant = (t % 2 == 0);
        auto made = make_instance(Graph::bowtie(), 4, plant, rng);
        auto w = decide_trapdoor(made.xwi);
        CHECK(w.has_value() == plant);
        if (w) {
            CompoundLayout layout;
            BoolCircuit c = build_compound_circuit(made.xwi, &layout);
            CHECK(c.eval(trapdoor_assignment(layout, *w)));
        }
    }
}

TEST_CASE("mauled c** (copied commitment blocks) does not satisfy the trapdoor branch") {
    Rng rng(47);
    const int lambda = 8;
    auto made = make_instance(Graph::complete(4), lambda, false, rng);
    // Mauling probe: splice commitment blocks that open under a *different*
    // randomness than the committed r*.
    const int m = trapdoor_payload_bits(lambda);
    WiInstance mauled = made.xwi;
    mauled.c_star_star.c.clear();
    for (int l = 0; l < m; ++l) {
        Bits seed = random_bits(lambda, rng);
        Commitment blk = commit_bit(mauled.receiver_for_prover, l & 1, seed);
        mauled.c_star_star.c.insert(mauled.c_star_star.c.end(), blk.c.begin(), blk.c.end());
    }
    CHECK(!decide_trapdoor(mauled).has_value());
}

TEST_CASE("reduce_to_hamiltonicity on decided circuits") {
    CircuitBuilder cb_true(0);
    BoolCircuit c_true = cb_true.finish(cb_true.constant(1));
    auto res = reduce_to_hamiltonicity(c_true, std::nullopt);
    REQUIRE(res.cycle.has_value());
    CHECK(is_hamiltonian_cycle(res.graph, *res.cycle));

    // x and not x: unsatisfiable, and the output graph is small enough to
    // verify non-Hamiltonicity by exhaustive cycle search.
    CircuitBuilder cb(1);
    BoolCircuit c_unsat = cb.finish(cb.f_and(cb.input(0), cb.f_not(cb.input(0))));
    auto res2 = reduce_to_hamiltonicity(c_unsat, std::nullopt);
    CHECK(!res2.cycle.has_value());
    CHECK(res2.graph.vertices() <= 12);
    CHECK(!find_hamiltonian_cycle(res2.graph).has_value());
}

TEST_CASE("reduction soundness: SAT by enumeration iff Hamiltonicity by enumeration") {
    Rng rng(48);
    for (int trial = 0; trial < 60; ++trial) {
        const int inputs = 1 + static_cast<int>(rng() % 3);
        CircuitBuilder cb(inputs);
        std::vector<int> wires;
        for (int i = 0; i < inputs; ++i) wires.push_back(cb.input(i));
        const int n_gates = 1 + static_cast<int>(rng() % 6);
        for (int g = 0; g < n_gates; ++g) {
            const int a = wires[rng() % wires.size()];
            const int b = wires[rng() % wires.size()];
            switch (rng() % 4) {
                case 0: wires.push_back(cb.f_and(a, b)); break;
                case 1: wires.push_back(cb.f_xor(a, b)); break;
                case 2: wires.push_back(cb.f_not(a)); break;
                default: wires.push_back(cb.constant(static_cast<int>(rng() & 1)));
            }
        }
        BoolCircuit c = cb.finish(wires.back());
        bool sat = false;
        for (uint64_t a = 0; a < (uint64_t{1} << inputs); ++a)
            if (c.eval(uint_to_bits(a, inputs))) sat = true;
        auto res = reduce_to_hamiltonicity(c, std::nullopt);
        CHECK(find_hamiltonian_cycle(res.graph).has_value() == sat);
        if (sat) {
            REQUIRE(res.cycle.has_value());
            CHECK(is_hamiltonian_cycle(res.graph, *res.cycle));
        }
    }
}

TEST_CASE("satisfying assignments map through the reduction to valid cycles") {
    CircuitBuilder cb(2);
    BoolCircuit c = cb.finish(cb.f_xor(cb.input(0), cb.input(1)));
    auto res = reduce_to_hamiltonicity(c, Bits{1, 0});
    REQUIRE(res.cycle.has_value());
    CHECK(is_hamiltonian_cycle(res.graph, *res.cycle));
}

TEST_CASE("honest Blum session accepts: K4 with its cycle, t=8") {
    Rng rng(49);
    for (int t = 0; t < 20; ++t) {
        auto tr = run_wi_session(Graph::complete(4), {0, 1, 2, 3}, 8, rng);
        CHECK(tr.accept);
        CHECK(verify_wi_transcript(Graph::complete(4), tr));
    }
}

TEST_CASE("witnessless prover on a non-Hamiltonian 5-vertex graph wins ~2^-t") {
    Rng rng(50);
    const Graph g = Graph::bowtie();
    int wins = 0;
    const int runs = 10000;
    const int t = 8;
    for (int r = 0; r < runs; ++r)
        if (run_wi_cheat_session(g, t, rng).accept) ++wins;
    const double rate = wins / static_cast<double>(runs);
    const double bound = std::pow(2.0, -t);
    CHECK(rate <= bound + three_sigma(bound, runs));
}

TEST_CASE("challenge bits are uniform coins") {
    Rng rng(51);
    std::vector<long> counts(2, 0);
    for (int s = 0; s < 200; ++s) {
        auto tr = run_wi_session(Graph::complete(4), {0, 1, 2, 3}, 64, rng);
        for (uint8_t b : tr.challenges) ++counts[b];
    }
    CHECK(chi2_goodness_pvalue(counts, {0.5, 0.5}) > 1e-3);
}

TEST_CASE("stored transcripts re-verify to the live verdict") {
    Rng rng(52);
    for (int t = 0; t < 50; ++t) {
        auto good = run_wi_session(Graph::complete(4), {0, 1, 2, 3}, 6, rng);
        CHECK(verify_wi_transcript(Graph::complete(4), good) == good.accept);
        auto cheat = run_wi_cheat_session(Graph::bowtie(), 6, rng);
        CHECK(verify_wi_transcript(Graph::bowtie(), cheat) == cheat.accept);
    }
    // Tampering flips the verdict.
    auto tr = run_wi_session(Graph::complete(4), {0, 1, 2, 3}, 6, rng);
    tr.responses[0].opened_seeds[0] = xor_bits(tr.responses[0].opened_seeds[0],
                                               uint_to_bits(1, tr.responses[0].opened_seeds[0].size()));
    CHECK(!verify_wi_transcript(Graph::complete(4), tr));
}

TEST_CASE("ideal-commitment transcript distributions under two witnesses are identical") {
    // Exact enumeration at t=1 on a 4-vertex instance with two distinct
    // Hamiltonian cycles. With information-theoretic commitments the visible
    // transcript is (challenge, pi) or (challenge, permuted cycle); enumerate
    // all 24 relabelings for each witness.
    const std::vector<int> w1 = {0, 1, 2, 3};
    const std::vector<int> w2 = {0, 2, 1, 3};
    std::vector<int> base = {0, 1, 2, 3};
    auto collect = [&](const std::vector<int>& w) {
        std::map<std::string, int> hist;
        std::vector<int> perm = base;
        std::sort(perm.begin(), perm.end());
        do {
            std::vector<int> revealed(4);
            for (int i = 0; i < 4; ++i) revealed[i] = perm[w[i]];
            ++hist[cycle_key(revealed)];
        } while (std::next_permutation(perm.begin(), perm.end()));
        return hist;
    };
    CHECK(collect(w1) == collect(w2));
}

TEST_CASE("real-commitment transcripts under two witnesses pass a chi-square equality test") {
    const Graph g = Graph::complete(4);
    const std::vector<int> w1 = {0, 1, 2, 3};
    const std::vector<int> w2 = {0, 2, 1, 3};
    auto observe = [&](const std::vector<int>& w, uint64_t seed) {
        Histogram h;
        Rng rng(seed);
        for (int s = 0; s < 10000; ++s) {
            auto tr = run_wi_session(g, w, 1, rng);
            std::string key = std::to_string(tr.challenges[0]) + "|";
            if (tr.challenges[0] == 0)
                for (int v : tr.responses[0].perm) key += std::to_string(v) + ",";
            else
                key += cycle_key(tr.responses[0].cycle);
            h.add(key);
        }
        return h;
    };
    Histogram h1 = observe(w1, 1001), h2 = observe(w2, 1002);
    auto [a, b] = Histogram::aligned(h1, h2);
    CHECK(chi2_two_sample_pvalue(a, b) > 1e-3);
}

TEST_CASE("OR composition: completeness from either branch") {
    Rng rng(53);
    for (int t = 0; t < 10; ++t) {
        // Left witness available.
        auto left = make_instance(Graph::complete(4), 8, false, rng);
        WiOrInstance inst = wi_or_instance(left.xwi);
        CHECK(!inst.right_cycle.has_value());
        ReceiverMsg rmsg = sample_receiver_msg(8, rng);
        WiOrCommitMsg commits;
        auto st = wi_or_commit(inst, WiOrWitness::Left, std::vector<int>{0, 1, 2, 3}, 12, rmsg,
                               rng, &commits);
        Bits e = random_bits(12, rng);
        auto reps = wi_or_respond(st, e);
        CHECK(wi_or_check(inst, rmsg, commits, e, reps));

        // Trapdoor branch available, no left witness.
        auto right = make_instance(Graph::bowtie(), 8, true, rng);
        WiOrInstance inst2 = wi_or_instance(right.xwi);
        REQUIRE(inst2.right_cycle.has_value());
        WiOrCommitMsg commits2;
        auto st2 =
            wi_or_commit(inst2, WiOrWitness::Right, std::nullopt, 12, rmsg, rng, &commits2);
        Bits e2 = random_bits(12, rng);
        auto reps2 = wi_or_respond(st2, e2);
        CHECK(wi_or_check(inst2, rmsg, commits2, e2, reps2));
    }
}

TEST_CASE("OR composition: no witness on either branch wins ~2^-t") {
    Rng rng(54);
    auto made = make_instance(Graph::bowtie(), 8, false, rng);
    WiOrInstance inst = wi_or_instance(made.xwi);
    CHECK(!inst.right_cycle.has_value());
    const int t = 6;
    int wins = 0;
    const int runs = 4000;
    for (int r = 0; r < runs; ++r) {
        ReceiverMsg rmsg = sample_receiver_msg(8, rng);
        WiOrCommitMsg commits;
        auto st = wi_or_commit(inst, WiOrWitness::None, std::nullopt, t, rmsg, rng, &commits);
        Bits e = random_bits(t, rng);
        if (wi_or_check(inst, rmsg, commits, e, wi_or_respond(st, e))) ++wins;
    }
    const double bound = std::pow(2.0, -t);
    CHECK(wins / static_cast<double>(runs) <= bound + three_sigma(bound, runs));
}

TEST_CASE("OR composition hides the used branch in its visible fields") {
    // Both witnesses available: compare the (challenge, left_challenge)
    // distribution when proving via left vs via right.
    Rng rng(55);
    auto made = make_instance(Graph::complete(4), 8, true, rng);
    WiOrInstance inst = wi_or_instance(made.xwi);
    REQUIRE(inst.right_cycle.has_value());
    auto observe = [&](WiOrWitness which, uint64_t seed) {
        Histogram h;
        Rng local(seed);
        for (int s = 0; s < 4000; ++s) {
            ReceiverMsg rmsg = sample_receiver_msg(8, local);
            WiOrCommitMsg commits;
            auto st = wi_or_commit(inst, which, std::vector<int>{0, 1, 2, 3}, 1, rmsg, local,
                                   &commits);
            Bits e = random_bits(1, local);
            auto reps = wi_or_respond(st, e);
            REQUIRE(wi_or_check(inst, rmsg, commits, e, reps));
            h.add(std::to_string(e[0]) + "|" + std::to_string(reps[0].left_challenge));
        }
        return h;
    };
    Histogram hl = observe(WiOrWitness::Left, 91), hr = observe(WiOrWitness::Right, 92);
    auto [a, b] = Histogram::aligned(hl, hr);
    CHECK(chi2_two_sample_pvalue(a, b) > 1e-3);
}
