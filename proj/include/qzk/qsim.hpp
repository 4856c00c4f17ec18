// Exact simulator for the hybrid computational model: an M-qubit programmable
// quantum computer driven in blocks of (unitary, prefix measurement, classical
// post-processing, reset), threaded through a (c, <U>, l, psi) hybrid state.
//
// Qubit convention: qubit 0 is the *first* qubit, i.e. the most significant
// bit of a basis index. "Measure the first l qubits" therefore touches a
// contiguous prefix of the basis labels.

#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qzk/common.hpp"

namespace qzk {

using cd = std::complex<double>;
using Matrix = std::vector<cd>;  // row-major, square

enum class GateKind { H, X, Z, Cnot, T, Toffoli, Dense };

struct Gate {
    GateKind kind;
    std::vector<int> targets;  // 1..3 qubit indices; for Cnot/Toffoli controls first
    Matrix dense;              // only for GateKind::Dense, 2^k x 2^k row-major

    static Gate h(int q) { return {GateKind::H, {q}, {}}; }
    static Gate x(int q) { return {GateKind::X, {q}, {}}; }
    static Gate z(int q) { return {GateKind::Z, {q}, {}}; }
    static Gate t(int q) { return {GateKind::T, {q}, {}}; }
    static Gate cnot(int control, int target) { return {GateKind::Cnot, {control, target}, {}}; }
    static Gate toffoli(int c1, int c2, int target) { return {GateKind::Toffoli, {c1, c2, target}, {}}; }
    static Gate dense_gate(std::vector<int> targets, Matrix m) {
        return {GateKind::Dense, std::move(targets), std::move(m)};
    }
};

// <U>: a gate-list description of an M-qubit unitary, or the distinguished
// halt value BOTTOM.
class UnitaryDescriptor {
public:
    UnitaryDescriptor() : arity_(-1) {}  // BOTTOM
    explicit UnitaryDescriptor(int arity, std::vector<Gate> gates = {});

    static UnitaryDescriptor bottom() { return UnitaryDescriptor(); }
    static UnitaryDescriptor identity(int arity) { return UnitaryDescriptor(arity); }

    bool is_bottom() const { return arity_ < 0; }
    int arity() const { return arity_; }
    const std::vector<Gate>& gates() const { return gates_; }
    void append(Gate g);

    // Dense 2^arity x 2^arity matrix; test-scale only (arity <= 6 by contract).
    Matrix materialize() const;

private:
    int arity_;
    std::vector<Gate> gates_;
};

class QState {
public:
    static QState zero(int num_qubits);                       // |0...0>
    static QState pure(int num_qubits, Matrix amplitudes);    // column vector
    static QState density(int num_qubits, Matrix rho);        // 2^m x 2^m
    static QState maximally_mixed_state(int num_qubits);
    static QState basis(int num_qubits, uint64_t index);

    int num_qubits() const { return num_qubits_; }
    bool is_pure() const { return pure_; }
    size_t dim() const { return size_t{1} << num_qubits_; }

    const Matrix& amplitudes() const;   // pure only
    const Matrix& rho() const;          // density only
    QState to_density() const;          // |psi><psi| if pure, copy otherwise

    cd amplitude(uint64_t index) const;         // pure only
    double basis_probability(uint64_t index) const;

    // Squared overlap with a pure target state (fidelity for pure targets).
    double fidelity_with(const QState& pure_target) const;

    QState tensor(const QState& other) const;

    void check_invariants(double tol = 1e-9) const;

private:
    int num_qubits_ = 0;
    bool pure_ = true;
    Matrix data_;  // amplitudes (pure) or row-major density matrix
};

struct HybridState {
    std::string classical;        // c, a byte string
    UnitaryDescriptor unitary;    // <U> or BOTTOM
    int measure_count = 0;        // l in [0, M]
    QState quantum;
};

// Tracks the qubit high-water mark of a computation against a hard limit.
class QubitBudget {
public:
    explicit QubitBudget(int limit) : limit_(limit) {}

    void allocate(int qubits);
    void release(int qubits);
    int peak_used() const { return peak_; }
    int limit() const { return limit_; }

private:
    int limit_;
    int used_ = 0;
    int peak_ = 0;
};

// Classical post-processing f: (c, <U>, l, o) -> (c', <U'>, l').
struct PostprocessResult {
    std::string classical;
    UnitaryDescriptor next_unitary;
    int next_measure_count = 0;
};
using Postprocess = std::function<PostprocessResult(
    const std::string& classical, const UnitaryDescriptor& unitary, int measure_count,
    const Bits& outcome)>;

struct ChannelOutput {
    std::string classical;
    int measure_count = 0;
    QState quantum;
    int blocks_executed = 0;
};

QState apply_unitary(const QState& state, const UnitaryDescriptor& u);
QState apply_gate(QState state, const Gate& gate);

std::pair<Bits, QState> measure_prefix(const QState& state, int l, Rng& rng);
// Deterministic replay: forces the given outcome, errors on a zero-probability branch.
std::pair<double, QState> measure_prefix_forced(const QState& state, int l, const Bits& outcome);
double prefix_probability(const QState& state, const Bits& outcome);

// Resets the first l qubits to |0>, assuming they are currently collapsed to a
// basis state (the run_block contract).
QState reset_prefix(const QState& state, int l, const Bits& outcome);

HybridState run_block(const HybridState& hs, const Postprocess& f, Rng& rng);
ChannelOutput run_channel(HybridState hs, const Postprocess& f, Rng& rng, int max_blocks = 10000);

QState maximally_mixed(int m);
double povm_prob(const Matrix& effect, const QState& state);

// Matrix helpers shared by the bound checks and the tests.
size_t matrix_dim(const Matrix& m);
Matrix matrix_mul(const Matrix& a, const Matrix& b);
Matrix matrix_adjoint(const Matrix& m);
cd matrix_trace(const Matrix& m);
bool is_hermitian(const Matrix& m, double tol = 1e-9);
bool is_unitary_matrix(const Matrix& m, double tol = 1e-9);
// Eigenvalues of a Hermitian matrix, ascending.
std::vector<double> hermitian_eigenvalues(const Matrix& m);
bool is_psd(const Matrix& m, double floor = -1e-9);
// Conjugation rho -> G rho G^dagger for a gate acting on a density matrix.
Matrix identity_matrix(size_t dim);

// Random effect 0 <= L <= I on m qubits, and a random density matrix.
Matrix random_effect(int m, Rng& rng);
QState random_density(int m, Rng& rng);
QState random_pure(int m, Rng& rng);

// Test-only dump format: "QST1" magic, u32 qubit count, interleaved
// little-endian f64 (re, im) pairs.
std::vector<uint8_t> dump_state(const QState& state);
QState load_state(const std::vector<uint8_t>& bytes);

}  // namespace qzk
