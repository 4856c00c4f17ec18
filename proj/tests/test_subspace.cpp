#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "qzk/subspace.hpp"

using namespace qzk;

namespace {

// Mask for coordinates written most-significant-first, e.g. vec4("1100").
F2Vec vec(const std::string& coords) {
    F2Vec v = 0;
    for (char c : coords) v = (v << 1) | (c == '1' ? 1 : 0);
    return v;
}

}  // namespace

TEST_CASE("rref canonicalizes and detects dependence") {
    // span{1100, 0110, 1010} has rank 2.
    CHECK(f2_rank({vec("1100"), vec("0110"), vec("1010")}) == 2);
    CHECK_THROWS_AS(Subspace(4, {vec("1100"), vec("0110"), vec("1010")}), DimensionError);
    Subspace a(4, {vec("1100"), vec("0110")});
    Subspace b(4, {vec("1010"), vec("0110")});
    CHECK(a == b);  // same row space, same canonical form
}

TEST_CASE("sampling n=2 k=1 hits the 3 subspaces uniformly") {
    Rng rng(404);
    std::map<F2Vec, int> freq;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        Subspace s = sample_subspace(2, 1, rng);
        REQUIRE(s.dim() == 1);
        ++freq[s.basis()[0]];
    }
    CHECK(freq.size() == 3);
    for (const auto& [v, count] : freq) {
        const double rate = count / static_cast<double>(trials);
        CHECK(std::abs(rate - 1.0 / 3.0) < 0.02);
    }
}

TEST_CASE("degenerate sampling cases") {
    Rng rng(9);
    Subspace zero = sample_subspace(4, 0, rng);
    CHECK(zero.dim() == 0);
    CHECK(zero.members() == std::vector<F2Vec>{0});
    Subspace full = sample_subspace(4, 4, rng);
    CHECK(full.dim() == 4);
    CHECK(full.basis() == std::vector<F2Vec>{vec("1000"), vec("0100"), vec("0010"), vec("0001")});
    CHECK_THROWS_AS(sample_subspace(3, 4, rng), DimensionError);
}

TEST_CASE("prepare_state enumerates members with amplitude 2^{-k/2}") {
    Subspace a(4, {vec("1000"), vec("0100")});
    QState s = prepare_state(a);
    // (|0000> + |0100> + |1000> + |1100>)/2
    CHECK(std::abs(s.amplitude(vec("0000")) - cd{0.5}) < 1e-12);
    CHECK(std::abs(s.amplitude(vec("0100")) - cd{0.5}) < 1e-12);
    CHECK(std::abs(s.amplitude(vec("1000")) - cd{0.5}) < 1e-12);
    CHECK(std::abs(s.amplitude(vec("1100")) - cd{0.5}) < 1e-12);
    CHECK(std::abs(s.amplitude(vec("0010"))) < 1e-12);

    QState z = prepare_state(Subspace(3, {}));
    CHECK(std::abs(z.amplitude(0) - cd{1}) < 1e-12);

    QState full = prepare_state(Subspace(2, {vec("10"), vec("01")}));
    QState hh = apply_gate(apply_gate(QState::zero(2), Gate::h(0)), Gate::h(1));
    for (size_t i = 0; i < 4; ++i) CHECK(std::abs(full.amplitude(i) - hh.amplitude(i)) < 1e-12);
}

TEST_CASE("prepare_state support is exactly the member set, norm exactly 1") {
    Rng rng(5);
    for (int t = 0; t < 25; ++t) {
        const int n = 2 + static_cast<int>(rng() % 7);
        const int k = static_cast<int>(rng() % (n + 1));
        Subspace a = sample_subspace(n, k, rng);
        QState s = prepare_state(a);
        const auto member_list = a.members();
        std::set<F2Vec> members(member_list.begin(), member_list.end());
        double norm2 = 0;
        for (size_t i = 0; i < s.dim(); ++i) {
            const double mag = std::abs(s.amplitude(i));
            if (members.count(static_cast<F2Vec>(i)))
                CHECK(mag == doctest::Approx(std::pow(2.0, -0.5 * k)));
            else
                CHECK(mag == 0.0);
            norm2 += mag * mag;
        }
        CHECK(std::abs(norm2 - 1.0) < 1e-12);
    }
}

TEST_CASE("distinct subspaces prepare states with distinct supports") {
    Rng rng(6);
    for (int t = 0; t < 50; ++t) {
        Subspace a = sample_subspace(6, 3, rng);
        Subspace b = sample_subspace(6, 3, rng);
        if (a == b) continue;
        CHECK(a.members() != b.members());
    }
}

TEST_CASE("build_CA maps |0^k>|0^n> to |0^k>|A> for an orthonormal basis") {
    // a = span{e1, e2} in F_2^4: RREF basis is orthonormal.
    Subspace a(4, {vec("1000"), vec("0100")});
    UnitaryDescriptor ca = build_CA(a);
    QState out = apply_unitary(QState::zero(2 + 4), ca);
    QState expect = QState::zero(2).tensor(prepare_state(a));
    CHECK(out.fidelity_with(expect) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("build_CA with k=0 is the identity on n qubits") {
    Subspace a(3, {});
    UnitaryDescriptor ca = build_CA(a);
    CHECK(ca.gates().empty());
    CHECK(ca.arity() == 3);
}

TEST_CASE("build_CA rejects self-orthogonal basis vectors") {
    // span{1100, 0011}: both rows have even weight.
    Subspace a(4, {vec("1100"), vec("0011")});
    CHECK_THROWS_AS(build_CA(a), BasisNotOrthonormal);
}

TEST_CASE("build_CA against the enumeration oracle on random valid bases") {
    Rng rng(31);
    int done = 0;
    while (done < 50) {
        const int n = 4 + 2 * static_cast<int>(rng() % 3);  // 4, 6, 8
        const int k = 1 + static_cast<int>(rng() % (n / 2));
        Subspace a = sample_subspace(n, k, rng);
        auto onb = orthonormal_basis(a);
        if (!onb) continue;
        UnitaryDescriptor ca = build_CA_from_basis(n, *onb);
        QState out = apply_unitary(QState::zero(k + n), ca);
        QState expect = QState::zero(k).tensor(prepare_state(a));
        CHECK(out.fidelity_with(expect) == doctest::Approx(1.0).epsilon(1e-12));
        ++done;
    }
}

TEST_CASE("orthonormal_basis is correct whenever it returns one, and spans A") {
    Rng rng(77);
    int found = 0, missing = 0;
    for (int t = 0; t < 200; ++t) {
        const int n = 2 + static_cast<int>(rng() % 7);
        const int k = static_cast<int>(rng() % (n + 1));
        Subspace a = sample_subspace(n, k, rng);
        auto onb = orthonormal_basis(a);
        if (!onb) {
            ++missing;
            continue;
        }
        ++found;
        REQUIRE(static_cast<int>(onb->size()) == k);
        for (size_t i = 0; i < onb->size(); ++i) {
            CHECK(f2_parity((*onb)[i]) == 1);
            CHECK(a.contains((*onb)[i]));
            for (size_t j = i + 1; j < onb->size(); ++j)
                CHECK(f2_inner((*onb)[i], (*onb)[j]) == 0);
        }
        CHECK(Subspace(n, f2_rref(*onb)) == a);
    }
    CHECK(found > 0);
    CHECK(missing > 0);  // both kinds occur at these sizes
}

TEST_CASE("orthonormal_basis handles the hyperbolic repair case") {
    // span{110, 011}: all nonzero members have even weight except 101... members:
    // 000, 110, 011, 101 -> all even. No orthonormal basis.
    CHECK(!orthonormal_basis(Subspace(3, {vec("110"), vec("011")})));
    // Full space F_2^2: members 00,01,10,11; q(01)=q(10)=1. Greedy picks 01,
    // complement {10}? <10,01>=0, parity 1 -> basis {01, 10}.
    auto onb = orthonormal_basis(Subspace(2, {vec("10"), vec("01")}));
    REQUIRE(onb.has_value());
    CHECK(onb->size() == 2);
    // Full space F_2^4 contains hyperbolic structure; must still succeed.
    auto onb4 = orthonormal_basis(Subspace(4, {vec("1000"), vec("0100"), vec("0010"), vec("0001")}));
    REQUIRE(onb4.has_value());
    CHECK(onb4->size() == 4);
}

TEST_CASE("apply_UA flips the flag on |A> and fixes orthogonal states") {
    Subspace a(4, {vec("1000"), vec("0100")});
    SubspaceOracleHandle h(a);
    QState in = prepare_state(a).tensor(QState::zero(1));
    QState out = h.apply_ua(in);
    QState expect = prepare_state(a).tensor(QState::basis(1, 1));
    CHECK(out.fidelity_with(expect) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(h.query_counter() == 1);

    // A state orthogonal to |A>: a member-supported vector with signs.
    Matrix amps(16, cd{0});
    amps[vec("0000")] = 0.5;
    amps[vec("0100")] = -0.5;
    amps[vec("1000")] = 0.5;
    amps[vec("1100")] = -0.5;
    QState orth = QState::pure(4, amps).tensor(QState::zero(1));
    QState fixed = h.apply_ua(orth);
    CHECK(fixed.fidelity_with(orth) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(h.query_counter() == 2);
}

TEST_CASE("apply_UA on a member basis state flips the flag with probability 2^{-k}") {
    Rng rng(12);
    const int n = 4, k = 2;
    Subspace a = sample_subspace(n, k, rng);
    SubspaceOracleHandle h(a);
    F2Vec x = a.members()[1];
    QState in = QState::basis(n, x).tensor(QState::zero(1));
    QState out = h.apply_ua(in);
    double p1 = 0;
    for (size_t j = 0; j < (size_t{1} << n); ++j) p1 += std::norm(out.amplitude(2 * j + 1));
    CHECK(p1 == doctest::Approx(std::pow(2.0, -k)).epsilon(1e-9));
    CHECK_THROWS_AS(h.apply_ua(QState::zero(n)), DimensionError);
}

TEST_CASE("test_state passes on |A> with probability 1 and post state |A>") {
    Rng rng(3);
    for (int t = 0; t < 10; ++t) {
        Subspace a = sample_subspace(6, 3, rng);
        SubspaceOracleHandle h(a);
        auto res = test_state(h, prepare_state(a), rng);
        CHECK(res.pass == 1);
        CHECK(res.post.fidelity_with(prepare_state(a)) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("test_state on the maximally mixed state passes with probability 2^{-n}") {
    Rng rng(8);
    const int n = 4;
    Subspace a = sample_subspace(n, 2, rng);
    // Analytic check through the density backend: pass prob = Tr(|A><A| I/2^n).
    SubspaceOracleHandle h(a);
    int passes = 0;
    const int trials = 20000;
    for (int t = 0; t < trials; ++t) {
        SubspaceOracleHandle fresh(a);
        if (test_state(fresh, maximally_mixed(n), rng).pass) ++passes;
    }
    const double rate = passes / static_cast<double>(trials);
    const double expect = std::pow(2.0, -n);
    CHECK(std::abs(rate - expect) < 3 * std::sqrt(expect * (1 - expect) / trials));
}

TEST_CASE("test_state pass probability is (2^d/2^k)^2 for another subspace state") {
    // Brute force at n=4: intersect dimensions d = dim(A cap B).
    Rng rng(14);
    int checked = 0;
    while (checked < 200) {
        Subspace a = sample_subspace(4, 2, rng);
        Subspace b = sample_subspace(4, 2, rng);
        // dim(A cap B) by enumeration.
        int inter = 0;
        for (F2Vec x : a.members())
            if (b.contains(x)) ++inter;
        const int d = static_cast<int>(std::log2(inter));
        SubspaceOracleHandle h(a);
        QState qb = prepare_state(b);
        // Exact pass probability = |<A|B>|^2.
        const double expect = std::pow(std::pow(2.0, d) / std::pow(2.0, 2), 2);
        CHECK(qb.fidelity_with(prepare_state(a)) == doctest::Approx(expect).epsilon(1e-9));
        ++checked;
    }
}

TEST_CASE("test_state is idempotent on pass") {
    Rng rng(15);
    for (int t = 0; t < 50; ++t) {
        Subspace a = sample_subspace(6, 3, rng);
        SubspaceOracleHandle h(a);
        QState probe = random_pure(6, rng);
        auto first = test_state(h, probe, rng);
        if (!first.pass) continue;
        auto second = test_state(h, first.post, rng);
        CHECK(second.pass == 1);
    }
}

TEST_CASE("query counter counts test_state and apply_UA calls exactly") {
    Rng rng(16);
    Subspace a = sample_subspace(4, 2, rng);
    SubspaceOracleHandle h(a);
    (void)test_state(h, prepare_state(a), rng);
    (void)h.apply_ua(QState::zero(5));
    (void)test_state(h, maximally_mixed(4), rng);
    CHECK(h.query_counter() == 3);
}

TEST_CASE("project_A outcome probabilities on canonical inputs") {
    Rng rng(17);
    for (int t = 0; t < 10; ++t) {
        const int n = 4;
        Subspace a = sample_subspace(n, 2, rng);
        CHECK(project_A_probability(a, prepare_state(a)) == doctest::Approx(1.0));
        CHECK(project_A_probability(a, maximally_mixed(n)) == doctest::Approx(std::pow(2.0, -n)));
        F2Vec x = a.members()[a.members().size() - 1];
        CHECK(project_A_probability(a, QState::basis(n, x)) == doctest::Approx(std::pow(2.0, -2)));
        auto res = project_A(a, prepare_state(a), rng);
        CHECK(res.outcome == 0);
    }
}

TEST_CASE("project_A via the C_A-dagger route matches the direct projector") {
    Rng rng(18);
    int done = 0;
    while (done < 100) {
        const int n = 4 + 2 * static_cast<int>(rng() % 3);  // up to 8
        const int k = 1 + static_cast<int>(rng() % (n / 2));
        Subspace a = sample_subspace(n, k, rng);
        if (!orthonormal_basis(a)) continue;
        QState probe = random_pure(n, rng);
        // Same uniform draw on both routes: outcomes must coincide, which also
        // pins their outcome-0 probabilities to within the draw resolution.
        Rng ra(1000 + done), rb(1000 + done);
        auto direct = project_A_direct(a, probe, ra);
        auto circuit = project_A_circuit(a, probe, rb);
        CHECK(direct.outcome == circuit.outcome);
        const double fid = circuit.post.is_pure() ? direct.post.fidelity_with(circuit.post)
                                                  : circuit.post.fidelity_with(direct.post);
        CHECK(fid > 1.0 - 1e-9);
        ++done;
    }
}

TEST_CASE("project_A on subspaces without orthonormal bases uses the direct route") {
    Rng rng(19);
    Subspace a(4, {vec("1100"), vec("0011")});
    CHECK(!orthonormal_basis(a));
    QState probe = random_pure(4, rng);
    auto res = project_A(a, probe, rng);
    CHECK((res.outcome == 0 || res.outcome == 1));
    CHECK_THROWS_AS(project_A_circuit(a, probe, rng), BasisNotOrthonormal);
}

TEST_CASE("clone_experiment: measure-and-resend sits at 2^{-n}") {
    Rng rng(20);
    auto rep = clone_experiment("measure_and_resend", 4, 10000, rng);
    CHECK(rep.mean_success_prob == doctest::Approx(1.0 / 16).epsilon(1e-9));
    CHECK(std::abs(rep.success_rate - 0.0625) < 0.01);
    CHECK(rep.total_queries == 0);
}

TEST_CASE("clone_experiment: identity pad sits at 2^{-k}") {
    Rng rng(21);
    auto rep = clone_experiment("identity_pad", 6, 4000, rng);
    CHECK(rep.mean_success_prob == doctest::Approx(std::pow(2.0, -3)).epsilon(1e-9));
    const double expect = std::pow(2.0, -3);
    CHECK(std::abs(rep.success_rate - expect) < 3 * std::sqrt(expect * (1 - expect) / 4000));
}

TEST_CASE("zero-query strategies never beat the overlap floor at n=6") {
    Rng rng(22);
    const double floor = std::pow(2.0, -3);
    auto mr = clone_experiment("measure_and_resend", 6, 4000, rng);
    auto pad = clone_experiment("identity_pad", 6, 4000, rng);
    const double slack = 3 * std::sqrt(floor * (1 - floor) / 4000);
    CHECK(mr.success_rate <= floor + slack);
    CHECK(pad.success_rate <= floor + slack);
}

TEST_CASE("grover-budget strategy improves with queries and counts them") {
    Rng rng(23);
    auto q0 = clone_experiment("oracle_grover_budget(0)", 4, 200, rng);
    auto q1 = clone_experiment("oracle_grover_budget(1)", 4, 200, rng);
    CHECK(q0.total_queries == 0);
    CHECK(q1.total_queries == 200);
    CHECK(q1.mean_success_prob > q0.mean_success_prob);
    CHECK_THROWS_AS(clone_experiment("warp_drive", 4, 1, rng), ConfigError);
}

TEST_CASE("subspace serialization round-trips") {
    Rng rng(24);
    for (int t = 0; t < 20; ++t) {
        const int n = 1 + static_cast<int>(rng() % 10);
        const int k = static_cast<int>(rng() % (n + 1));
        Subspace a = sample_subspace(n, k, rng);
        auto bytes = a.serialize();
        Subspace back = Subspace::deserialize(bytes);
        CHECK(back == a);
    }
    CHECK_THROWS_AS(Subspace::deserialize({'S', 'U', 'B', '2', 0, 0, 0, 0}), FormatError);
}
