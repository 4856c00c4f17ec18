// Subspace states over F_2^n: sampling, |A> preparation, the C_A preparation
// circuit, the membership-flip oracle U_A, the oracle test, the low-memory
// projective measurement onto |A><A|, and cloning experiments.
//
// A vector v in F_2^n is stored as a mask whose bit (n-1-j) holds coordinate j,
// so a member's mask is exactly its basis-state index under the qsim qubit
// convention.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qzk/common.hpp"
#include "qzk/qsim.hpp"

namespace qzk {

using F2Vec = uint32_t;

inline int f2_parity(F2Vec v) { return __builtin_popcount(v) & 1; }
inline int f2_inner(F2Vec a, F2Vec b) { return __builtin_popcount(a & b) & 1; }

class Subspace {
public:
    Subspace() = default;
    // Rows are reduced to RREF; throws DimensionError if they are dependent.
    Subspace(int ambient_dim, std::vector<F2Vec> basis_rows);

    int ambient_dim() const { return n_; }
    int dim() const { return k_; }
    const std::vector<F2Vec>& basis() const { return rows_; }

    bool contains(F2Vec v) const;
    std::vector<F2Vec> members() const;  // all 2^k elements

    bool operator==(const Subspace& other) const {
        return n_ == other.n_ && rows_ == other.rows_;
    }

    std::vector<uint8_t> serialize() const;  // "SUB1" format
    static Subspace deserialize(const std::vector<uint8_t>& bytes);

private:
    int n_ = 0;
    int k_ = 0;
    std::vector<F2Vec> rows_;  // RREF, pivots strictly decreasing
};

// RREF of a set of row masks; returns independent rows only.
std::vector<F2Vec> f2_rref(std::vector<F2Vec> rows);
int f2_rank(const std::vector<F2Vec>& rows);

Subspace sample_subspace(int n, int k, Rng& rng);

// |A> = sum_{x in A} 2^{-k/2} |x>, direct enumeration (n <= 12).
QState prepare_state(const Subspace& a);

// Basis of A with <v_i, v_j> = delta_ij over F_2, when one exists.
std::optional<std::vector<F2Vec>> orthonormal_basis(const Subspace& a);

// C_A on k+n qubits (X = first k, Y = last n): |0^k>|0^n> -> |0^k>|A>.
// Requires the subspace's canonical basis to be orthonormal over F_2.
UnitaryDescriptor build_CA(const Subspace& a);
// Same circuit from an explicit orthonormal basis of the subspace.
UnitaryDescriptor build_CA_from_basis(int n, const std::vector<F2Vec>& basis);

// Oracle handle hiding the subspace; consumers get apply_ua and nothing else.
class SubspaceOracleHandle {
public:
    explicit SubspaceOracleHandle(Subspace a) : a_(std::move(a)) {}

    int ambient_dim() const { return a_.ambient_dim(); }
    int subspace_dim() const { return a_.dim(); }
    long query_counter() const { return queries_; }

    // |A>|y> -> |A>|y xor 1>; states orthogonal to |A> are untouched.
    QState apply_ua(const QState& state);

private:
    friend class OracleSecretAccess;  // test-only escrow for experiment scoring
    Subspace a_;
    long queries_ = 0;
};

// Experiments must score cloning output against the hidden subspace without
// letting strategies peek; this is the single audited access path.
class OracleSecretAccess {
public:
    static const Subspace& subspace(const SubspaceOracleHandle& h) { return h.a_; }
};

struct TestResult {
    int pass = 0;  // 1 iff the measured flag was 1
    QState post;   // n-qubit post state
};

// Test^{U_A}: one oracle query, measure the flag qubit; on pass the post
// state is |A><A| exactly.
TestResult test_state(SubspaceOracleHandle& h, const QState& rho, Rng& rng);

struct ProjectResult {
    int outcome = 0;  // 0 = projected onto |A><A|
    QState post;
};

// Projective measurement {|A><A|, I - |A><A|}; picks the C_A-dagger route when
// an orthonormal basis exists, the direct projector otherwise.
ProjectResult project_A(const Subspace& a, const QState& rho, Rng& rng);
ProjectResult project_A_direct(const Subspace& a, const QState& rho, Rng& rng);
ProjectResult project_A_circuit(const Subspace& a, const QState& rho, Rng& rng);

// Outcome-0 probability without sampling.
double project_A_probability(const Subspace& a, const QState& rho);

struct CloneReport {
    std::string strategy;
    int n = 0;
    int trials = 0;
    int successes = 0;
    double success_rate = 0;       // Monte-Carlo estimate
    double mean_success_prob = 0;  // exact per-trial projection probabilities, averaged
    long total_queries = 0;        // U_A queries summed over trials
};

// strategy: "measure_and_resend", "identity_pad", or "oracle_grover_budget(q)".
CloneReport clone_experiment(const std::string& strategy, int n, int trials, Rng& rng);

}  // namespace qzk
