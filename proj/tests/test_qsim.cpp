#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qzk/qsim.hpp"

using namespace qzk;

namespace {

// Hand oracle: dense matrix-vector product against the gate-level path.
Matrix mat_vec(const Matrix& m, const Matrix& v) {
    const size_t d = matrix_dim(m);
    Matrix out(d, cd{0});
    for (size_t r = 0; r < d; ++r)
        for (size_t c = 0; c < d; ++c) out[r] += m[r * d + c] * v[c];
    return out;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    const size_t da = matrix_dim(a), db = matrix_dim(b), d = da * db;
    Matrix out(d * d);
    for (size_t r1 = 0; r1 < da; ++r1)
        for (size_t c1 = 0; c1 < da; ++c1)
            for (size_t r2 = 0; r2 < db; ++r2)
                for (size_t c2 = 0; c2 < db; ++c2)
                    out[(r1 * db + r2) * d + (c1 * db + c2)] = a[r1 * da + c1] * b[r2 * db + c2];
    return out;
}

}  // namespace

TEST_CASE("X flips a basis state") {
    QState s = QState::zero(1);
    s = apply_gate(std::move(s), Gate::x(0));
    CHECK(std::abs(s.amplitude(1) - cd{1}) < 1e-12);
}

TEST_CASE("H twice is the identity on a random 3-qubit state") {
    Rng rng(7);
    QState s = random_pure(3, rng);
    const Matrix before = s.amplitudes();
    for (int q = 0; q < 3; ++q) s = apply_gate(std::move(s), Gate::h(q));
    for (int q = 0; q < 3; ++q) s = apply_gate(std::move(s), Gate::h(q));
    for (size_t i = 0; i < before.size(); ++i)
        CHECK(std::abs(s.amplitudes()[i] - before[i]) < 1e-12);
}

TEST_CASE("CNOT on (H x I)|00> gives the Bell state, against the 4x4 hand oracle") {
    // Frozen expectation computed via explicit matrices.
    const double r = 1.0 / std::sqrt(2.0);
    Matrix h2 = {r, r, r, -r};
    Matrix id = {1, 0, 0, 1};
    Matrix cnot = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0};
    Matrix expect = mat_vec(cnot, mat_vec(kron(h2, id), Matrix{1, 0, 0, 0}));
    CHECK(std::abs(expect[0] - cd{0.7071067811865475}) < 1e-12);
    CHECK(std::abs(expect[3] - cd{0.7071067811865475}) < 1e-12);

    QState s = QState::zero(2);
    s = apply_gate(std::move(s), Gate::h(0));
    s = apply_gate(std::move(s), Gate::cnot(0, 1));
    for (size_t i = 0; i < 4; ++i) CHECK(std::abs(s.amplitude(i) - expect[i]) < 1e-12);
}

TEST_CASE("gate application agrees with materialized unitaries on random circuits") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const int m = 2 + static_cast<int>(rng() % 3);
        UnitaryDescriptor u(m);
        for (int g = 0; g < 6; ++g) {
            switch (rng() % 5) {
                case 0: u.append(Gate::h(rng() % m)); break;
                case 1: u.append(Gate::x(rng() % m)); break;
                case 2: u.append(Gate::z(rng() % m)); break;
                case 3: u.append(Gate::t(rng() % m)); break;
                default: {
                    int a = rng() % m, b = rng() % m;
                    if (a == b) b = (b + 1) % m;
                    u.append(Gate::cnot(a, b));
                }
            }
        }
        Matrix dense = u.materialize();
        CHECK(is_unitary_matrix(dense, 1e-9));
        QState in = random_pure(m, rng);
        QState out = apply_unitary(in, u);
        Matrix expect = mat_vec(dense, in.amplitudes());
        for (size_t i = 0; i < expect.size(); ++i)
            CHECK(std::abs(out.amplitudes()[i] - expect[i]) < 1e-9);
    }
}

TEST_CASE("apply_unitary rejects arity mismatch and BOTTOM") {
    QState s = QState::zero(2);
    CHECK_THROWS_AS(apply_unitary(s, UnitaryDescriptor::identity(3)), DimensionError);
    CHECK_THROWS_AS(apply_unitary(s, UnitaryDescriptor::bottom()), Error);
}

TEST_CASE("measure_prefix with l=0 returns the state unchanged") {
    Rng rng(3);
    QState s = random_pure(2, rng);
    auto [outcome, post] = measure_prefix(s, 0, rng);
    CHECK(outcome.empty());
    for (size_t i = 0; i < 4; ++i) CHECK(std::abs(post.amplitude(i) - s.amplitude(i)) < 1e-12);
}

TEST_CASE("measure_prefix on H|0> is a fair coin over seeded trials") {
    Rng rng(11);
    int ones = 0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        QState s = apply_gate(QState::zero(1), Gate::h(0));
        auto [outcome, post] = measure_prefix(s, 1, rng);
        ones += outcome[0];
    }
    const double rate = static_cast<double>(ones) / trials;
    CHECK(rate > 0.48);
    CHECK(rate < 0.52);
}

TEST_CASE("measure_prefix on |10> is deterministic") {
    Rng rng(5);
    QState s = QState::basis(2, 0b10);
    auto [outcome, post] = measure_prefix(s, 2, rng);
    CHECK(outcome == Bits{1, 0});
    CHECK(std::abs(post.amplitude(0b10) - cd{1}) < 1e-12);
}

TEST_CASE("measure_prefix rejects out-of-range l; forced replay rejects impossible branches") {
    Rng rng(5);
    QState s = QState::zero(2);
    CHECK_THROWS_AS(measure_prefix(s, 3, rng), DimensionError);
    CHECK_THROWS_AS(measure_prefix_forced(s, 1, Bits{1}), ImpossibleBranch);
    auto [p, post] = measure_prefix_forced(s, 1, Bits{0});
    CHECK(p == doctest::Approx(1.0));
}

TEST_CASE("run_block with identity and l=0 only applies the post-processing") {
    Rng rng(1);
    HybridState hs{"seed", UnitaryDescriptor::identity(2), 0, QState::zero(2)};
    auto f = [](const std::string& c, const UnitaryDescriptor&, int, const Bits&) {
        return PostprocessResult{c + "!", UnitaryDescriptor::bottom(), 0};
    };
    HybridState out = run_block(hs, f, rng);
    CHECK(out.classical == "seed!");
    CHECK(out.unitary.is_bottom());
    CHECK(std::abs(out.quantum.amplitude(0) - cd{1}) < 1e-12);
}

TEST_CASE("run_block measures H|0> into the classical register and resets the qubit") {
    Rng rng(2);
    UnitaryDescriptor h(1);
    h.append(Gate::h(0));
    HybridState hs{"", h, 1, QState::zero(1)};
    auto f = [](const std::string& c, const UnitaryDescriptor&, int, const Bits& o) {
        return PostprocessResult{c + (o[0] ? "1" : "0"), UnitaryDescriptor::bottom(), 0};
    };
    for (int t = 0; t < 20; ++t) {
        HybridState out = run_block(hs, f, rng);
        CHECK(out.classical.size() == 1);
        // Reset contract: the measured qubit is |0> again.
        CHECK(std::abs(out.quantum.amplitude(0) - cd{1}) < 1e-12);
    }
}

TEST_CASE("run_block rejects l' > M") {
    Rng rng(1);
    HybridState hs{"", UnitaryDescriptor::identity(1), 0, QState::zero(1)};
    auto f = [](const std::string& c, const UnitaryDescriptor&, int, const Bits&) {
        return PostprocessResult{c, UnitaryDescriptor::identity(1), 2};
    };
    CHECK_THROWS_AS(run_block(hs, f, rng), PostprocessError);
}

TEST_CASE("run_channel halts on BOTTOM after one block") {
    Rng rng(1);
    HybridState hs{"", UnitaryDescriptor::identity(1), 0, QState::zero(1)};
    auto f = [](const std::string& c, const UnitaryDescriptor&, int, const Bits&) {
        return PostprocessResult{c + "x", UnitaryDescriptor::bottom(), 0};
    };
    auto out = run_channel(hs, f, rng);
    CHECK(out.blocks_executed == 1);
    CHECK(out.classical == "x");
}

TEST_CASE("run_channel folds a fixed 3-block deterministic computation") {
    Rng rng(1);
    HybridState hs{"", UnitaryDescriptor::identity(1), 0, QState::zero(1)};
    auto f = [](const std::string& c, const UnitaryDescriptor&, int, const Bits&) {
        std::string c2 = c + "a";
        if (c2.size() >= 3) return PostprocessResult{c2, UnitaryDescriptor::bottom(), 0};
        return PostprocessResult{c2, UnitaryDescriptor::identity(1), 0};
    };
    auto out = run_channel(hs, f, rng);
    CHECK(out.blocks_executed == 3);
    CHECK(out.classical == "aaa");
}

TEST_CASE("coin-flip channel halts geometrically with mean 2") {
    // Each block measures H|0> and halts on outcome 1; mean blocks = 1/p = 2.
    Rng rng(13);
    UnitaryDescriptor h(1);
    h.append(Gate::h(0));
    auto f = [&](const std::string& c, const UnitaryDescriptor&, int, const Bits& o) {
        if (o[0]) return PostprocessResult{c, UnitaryDescriptor::bottom(), 0};
        UnitaryDescriptor again(1);
        again.append(Gate::h(0));
        return PostprocessResult{c, again, 1};
    };
    double total = 0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        HybridState hs{"", h, 1, QState::zero(1)};
        total += run_channel(hs, f, rng).blocks_executed;
    }
    const double mean = total / trials;
    CHECK(mean > 1.9);
    CHECK(mean < 2.1);
}

TEST_CASE("run_channel reports non-termination") {
    Rng rng(1);
    HybridState hs{"", UnitaryDescriptor::identity(1), 0, QState::zero(1)};
    auto f = [](const std::string& c, const UnitaryDescriptor&, int, const Bits&) {
        return PostprocessResult{c, UnitaryDescriptor::identity(1), 0};
    };
    CHECK_THROWS_AS(run_channel(hs, f, rng, 16), NonTermination);
}

TEST_CASE("maximally mixed states") {
    QState one = maximally_mixed(1);
    CHECK(one.rho()[0].real() == doctest::Approx(0.5));
    CHECK(one.rho()[3].real() == doctest::Approx(0.5));
    QState zero = maximally_mixed(0);
    CHECK(zero.rho()[0].real() == doctest::Approx(1.0));
    QState three = maximally_mixed(3);
    CHECK(matrix_trace(three.rho()).real() == doctest::Approx(1.0));
    for (auto ev : hermitian_eigenvalues(three.rho())) CHECK(ev == doctest::Approx(0.125));
}

TEST_CASE("povm_prob basics") {
    Matrix p0 = {1, 0, 0, 0};  // |0><0|
    CHECK(povm_prob(p0, QState::zero(1)) == doctest::Approx(1.0));
    CHECK(povm_prob(p0, maximally_mixed(1)) == doctest::Approx(0.5));
    Matrix bad = {2, 0, 0, 0};
    CHECK_THROWS_AS(povm_prob(bad, QState::zero(1)), InvalidEffect);
    Matrix wrong = {1};
    CHECK_THROWS_AS(povm_prob(wrong, QState::zero(1)), DimensionError);
}

TEST_CASE("maximally mixed bound: Tr(L I/2^M) >= Tr(L rho)/2^M over random pairs") {
    Rng rng(99);
    for (int m = 1; m <= 5; ++m) {
        const int pairs = (m <= 3) ? 300 : 100;
        for (int t = 0; t < pairs; ++t) {
            Matrix effect = random_effect(m, rng);
            QState rho = (t % 2 == 0) ? random_density(m, rng) : random_pure(m, rng).to_density();
            const double lhs = povm_prob(effect, maximally_mixed(m));
            const double rhs = povm_prob(effect, rho) / std::pow(2.0, m);
            CHECK(lhs >= rhs - 1e-9);
        }
    }
}

TEST_CASE("run_block preserves norm for pure input with l=0") {
    Rng rng(17);
    UnitaryDescriptor u(3);
    u.append(Gate::h(0));
    u.append(Gate::cnot(0, 2));
    u.append(Gate::t(1));
    HybridState hs{"", u, 0, random_pure(3, rng)};
    auto f = [](const std::string& c, const UnitaryDescriptor&, int, const Bits&) {
        return PostprocessResult{c, UnitaryDescriptor::bottom(), 0};
    };
    HybridState out = run_block(hs, f, rng);
    double norm2 = 0;
    for (const cd& a : out.quantum.amplitudes()) norm2 += std::norm(a);
    CHECK(std::abs(norm2 - 1.0) < 1e-9);
}

TEST_CASE("statevector and density backends agree on trajectory marginals") {
    // Bell pair: prefix measurement statistics must match the density diagonal
    // within 3-sigma binomial bounds.
    Rng rng(23);
    QState bell = apply_gate(apply_gate(QState::zero(2), Gate::h(0)), Gate::cnot(0, 1));
    QState bell_rho = bell.to_density();
    const int trials = 10000;
    int count00 = 0;
    for (int t = 0; t < trials; ++t) {
        auto [o, post] = measure_prefix(bell, 2, rng);
        if (o == Bits{0, 0}) ++count00;
    }
    const double expect = prefix_probability(bell_rho, Bits{0, 0});
    CHECK(expect == doctest::Approx(0.5));
    const double sigma = std::sqrt(0.5 * 0.5 / trials);
    CHECK(std::abs(count00 / static_cast<double>(trials) - expect) < 3 * sigma);
}

TEST_CASE("density-backend block execution matches the pure backend") {
    Rng rng_a(31), rng_b(31);
    UnitaryDescriptor u(2);
    u.append(Gate::h(0));
    u.append(Gate::cnot(0, 1));
    auto f = [](const std::string& c, const UnitaryDescriptor&, int, const Bits& o) {
        return PostprocessResult{c + (o.empty() || !o[0] ? "0" : "1"), UnitaryDescriptor::bottom(), 0};
    };
    // Same seeds, same sampled branch; compare final density matrices.
    HybridState pure_hs{"", u, 1, QState::zero(2)};
    HybridState dens_hs{"", u, 1, QState::zero(2).to_density()};
    HybridState pure_out = run_block(pure_hs, f, rng_a);
    HybridState dens_out = run_block(dens_hs, f, rng_b);
    CHECK(pure_out.classical == dens_out.classical);
    const Matrix lhs = pure_out.quantum.to_density().rho();
    const Matrix rhs = dens_out.quantum.rho();
    for (size_t i = 0; i < lhs.size(); ++i) CHECK(std::abs(lhs[i] - rhs[i]) < 1e-9);
}

TEST_CASE("deterministic replay: equal seeds give identical classical folds") {
    auto run_once = [](uint64_t seed) {
        Rng rng(seed);
        UnitaryDescriptor h(2);
        h.append(Gate::h(0));
        h.append(Gate::h(1));
        auto f = [](const std::string& c, const UnitaryDescriptor&, int, const Bits& o) {
            std::string c2 = c;
            for (uint8_t b : o) c2 += (b ? '1' : '0');
            if (c2.size() >= 12) return PostprocessResult{c2, UnitaryDescriptor::bottom(), 0};
            UnitaryDescriptor again(2);
            again.append(Gate::h(0));
            again.append(Gate::h(1));
            return PostprocessResult{c2, again, 2};
        };
        HybridState hs{"", h, 2, QState::zero(2)};
        Rng local(seed);
        return run_channel(hs, f, local).classical;
    };
    CHECK(run_once(420) == run_once(420));
    CHECK(run_once(420) != run_once(421));  // overwhelmingly
}

TEST_CASE("qubit budget tracks the peak and enforces the limit") {
    QubitBudget budget(6);
    budget.allocate(3);
    budget.allocate(3);
    budget.release(3);
    budget.allocate(2);
    CHECK(budget.peak_used() == 6);
    CHECK_THROWS_AS(budget.allocate(2), BudgetError);
}

TEST_CASE("state dump round-trips") {
    Rng rng(77);
    QState s = random_pure(3, rng);
    auto bytes = dump_state(s);
    CHECK(bytes.size() == 8 + 8 * 16);
    QState back = load_state(bytes);
    CHECK(back.num_qubits() == 3);
    for (size_t i = 0; i < s.dim(); ++i) CHECK(std::abs(back.amplitude(i) - s.amplitude(i)) < 1e-15);
    bytes[0] = 'X';
    CHECK_THROWS_AS(load_state(bytes), FormatError);
}

TEST_CASE("invariant checks reject malformed states") {
    Matrix unnorm = {cd{1}, cd{1}};
    CHECK_THROWS_AS(QState::pure(1, unnorm), DimensionError);
    Matrix not_herm = {cd{0.5}, cd{0.5}, cd{-0.5}, cd{0.5}};
    CHECK_THROWS_AS(QState::density(1, not_herm), DimensionError);
    Matrix neg = {cd{1.5}, cd{0}, cd{0}, cd{-0.5}};
    CHECK_THROWS_AS(QState::density(1, neg), DimensionError);
}
