#include "qzk/qsim.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

namespace qzk {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

Matrix gate_matrix(const Gate& g) {
    switch (g.kind) {
        case GateKind::H:
            return {kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2};
        case GateKind::X:
            return {0, 1, 1, 0};
        case GateKind::Z:
            return {1, 0, 0, -1};
        case GateKind::T:
            return {1, 0, 0, std::polar(1.0, M_PI / 4)};
        case GateKind::Cnot:
            return {1, 0, 0, 0,
                    0, 1, 0, 0,
                    0, 0, 0, 1,
                    0, 0, 1, 0};
        case GateKind::Toffoli: {
            Matrix m(64, cd{0});
            for (int i = 0; i < 6; ++i) m[i * 8 + i] = 1;
            m[6 * 8 + 7] = 1;
            m[7 * 8 + 6] = 1;
            return m;
        }
        case GateKind::Dense:
            return g.dense;
    }
    throw Error("unreachable gate kind");
}

// Applies a k-qubit gate to an amplitude vector over `total` qubits. Qubit q
// maps to bit (total-1-q) of the index; targets[0] is the most significant
// bit of the gate's local index.
void apply_gate_amps(Matrix& amps, int total, const std::vector<int>& targets,
                     const Matrix& m, bool conjugate) {
    const int k = static_cast<int>(targets.size());
    const size_t sub = size_t{1} << k;
    std::vector<uint64_t> masks(k);
    uint64_t targets_mask = 0;
    for (int i = 0; i < k; ++i) {
        if (targets[i] < 0 || targets[i] >= total)
            throw DimensionError("gate target out of range");
        masks[i] = uint64_t{1} << (total - 1 - targets[i]);
        if (targets_mask & masks[i]) throw DimensionError("duplicate gate target");
        targets_mask |= masks[i];
    }
    std::vector<cd> in(sub), out(sub);
    const uint64_t dim = uint64_t{1} << total;
    for (uint64_t base = 0; base < dim; ++base) {
        if (base & targets_mask) continue;  // enumerate target-bits-zero bases only
        for (size_t s = 0; s < sub; ++s) {
            uint64_t idx = base;
            for (int i = 0; i < k; ++i)
                if ((s >> (k - 1 - i)) & 1) idx |= masks[i];
            in[s] = amps[idx];
        }
        for (size_t r = 0; r < sub; ++r) {
            cd acc{0};
            for (size_t c = 0; c < sub; ++c) {
                cd coeff = m[r * sub + c];
                if (conjugate) coeff = std::conj(coeff);
                acc += coeff * in[c];
            }
            out[r] = acc;
        }
        for (size_t s = 0; s < sub; ++s) {
            uint64_t idx = base;
            for (int i = 0; i < k; ++i)
                if ((s >> (k - 1 - i)) & 1) idx |= masks[i];
            amps[idx] = out[s];
        }
    }
}

uint64_t outcome_to_prefix(const Bits& outcome) {
    uint64_t o = 0;
    for (size_t i = 0; i < outcome.size(); ++i)
        if (outcome[i]) o |= uint64_t{1} << (outcome.size() - 1 - i);
    return o;
}

Bits prefix_to_outcome(uint64_t o, int l) {
    Bits bits(l);
    for (int i = 0; i < l; ++i) bits[i] = (o >> (l - 1 - i)) & 1u;
    return bits;
}

Eigen::MatrixXcd to_eigen(const Matrix& m) {
    const size_t d = matrix_dim(m);
    Eigen::MatrixXcd out(d, d);
    for (size_t r = 0; r < d; ++r)
        for (size_t c = 0; c < d; ++c) out(r, c) = m[r * d + c];
    return out;
}

}  // namespace

UnitaryDescriptor::UnitaryDescriptor(int arity, std::vector<Gate> gates)
    : arity_(arity), gates_(std::move(gates)) {
    if (arity < 0) throw DimensionError("unitary arity must be >= 0");
    for (const auto& g : gates_)
        for (int t : g.targets)
            if (t < 0 || t >= arity_) throw DimensionError("gate target outside arity");
}

void UnitaryDescriptor::append(Gate g) {
    if (is_bottom()) throw Error("cannot append to BOTTOM");
    for (int t : g.targets)
        if (t < 0 || t >= arity_) throw DimensionError("gate target outside arity");
    gates_.push_back(std::move(g));
}

Matrix UnitaryDescriptor::materialize() const {
    if (is_bottom()) throw Error("cannot materialize BOTTOM");
    const size_t d = size_t{1} << arity_;
    Matrix u(d * d, cd{0});
    for (size_t col = 0; col < d; ++col) {
        Matrix amps(d, cd{0});
        amps[col] = 1;
        for (const auto& g : gates_) apply_gate_amps(amps, arity_, g.targets, gate_matrix(g), false);
        for (size_t row = 0; row < d; ++row) u[row * d + col] = amps[row];
    }
    return u;
}

QState QState::zero(int num_qubits) { return basis(num_qubits, 0); }

QState QState::basis(int num_qubits, uint64_t index) {
    if (num_qubits < 0) throw DimensionError("negative qubit count");
    QState s;
    s.num_qubits_ = num_qubits;
    s.pure_ = true;
    s.data_.assign(size_t{1} << num_qubits, cd{0});
    if (index >= s.data_.size()) throw DimensionError("basis index out of range");
    s.data_[index] = 1;
    return s;
}

QState QState::pure(int num_qubits, Matrix amplitudes) {
    if (amplitudes.size() != (size_t{1} << num_qubits))
        throw DimensionError("amplitude vector has wrong length");
    QState s;
    s.num_qubits_ = num_qubits;
    s.pure_ = true;
    s.data_ = std::move(amplitudes);
    s.check_invariants();
    return s;
}

QState QState::density(int num_qubits, Matrix rho) {
    const size_t d = size_t{1} << num_qubits;
    if (rho.size() != d * d) throw DimensionError("density matrix has wrong shape");
    QState s;
    s.num_qubits_ = num_qubits;
    s.pure_ = false;
    s.data_ = std::move(rho);
    s.check_invariants();
    return s;
}

QState QState::maximally_mixed_state(int num_qubits) {
    const size_t d = size_t{1} << num_qubits;
    Matrix rho(d * d, cd{0});
    for (size_t i = 0; i < d; ++i) rho[i * d + i] = 1.0 / static_cast<double>(d);
    QState s;
    s.num_qubits_ = num_qubits;
    s.pure_ = false;
    s.data_ = std::move(rho);
    return s;
}

const Matrix& QState::amplitudes() const {
    if (!pure_) throw ModeError("state is not in statevector form");
    return data_;
}

const Matrix& QState::rho() const {
    if (pure_) throw ModeError("state is not in density form");
    return data_;
}

QState QState::to_density() const {
    if (!pure_) return *this;
    const size_t d = dim();
    Matrix rho(d * d);
    for (size_t r = 0; r < d; ++r)
        for (size_t c = 0; c < d; ++c) rho[r * d + c] = data_[r] * std::conj(data_[c]);
    QState s;
    s.num_qubits_ = num_qubits_;
    s.pure_ = false;
    s.data_ = std::move(rho);
    return s;
}

cd QState::amplitude(uint64_t index) const {
    if (!pure_) throw ModeError("amplitude() needs a pure state");
    return data_.at(index);
}

double QState::basis_probability(uint64_t index) const {
    if (pure_) return std::norm(data_.at(index));
    return data_.at(index * dim() + index).real();
}

double QState::fidelity_with(const QState& pure_target) const {
    if (!pure_target.is_pure()) throw ModeError("fidelity target must be pure");
    if (pure_target.num_qubits() != num_qubits_) throw DimensionError("fidelity dim mismatch");
    const auto& t = pure_target.amplitudes();
    if (pure_) {
        cd ov{0};
        for (size_t i = 0; i < data_.size(); ++i) ov += std::conj(t[i]) * data_[i];
        return std::norm(ov);
    }
    // <t| rho |t>
    const size_t d = dim();
    cd acc{0};
    for (size_t r = 0; r < d; ++r) {
        cd row{0};
        for (size_t c = 0; c < d; ++c) row += data_[r * d + c] * t[c];
        acc += std::conj(t[r]) * row;
    }
    return acc.real();
}

QState QState::tensor(const QState& other) const {
    if (pure_ && other.pure_) {
        Matrix amps(dim() * other.dim());
        for (size_t i = 0; i < dim(); ++i)
            for (size_t j = 0; j < other.dim(); ++j)
                amps[i * other.dim() + j] = data_[i] * other.data_[j];
        return QState::pure(num_qubits_ + other.num_qubits_, std::move(amps));
    }
    const QState a = to_density();
    const QState b = other.to_density();
    const size_t da = a.dim(), db = b.dim(), d = da * db;
    Matrix rho(d * d);
    for (size_t r1 = 0; r1 < da; ++r1)
        for (size_t c1 = 0; c1 < da; ++c1)
            for (size_t r2 = 0; r2 < db; ++r2)
                for (size_t c2 = 0; c2 < db; ++c2)
                    rho[(r1 * db + r2) * d + (c1 * db + c2)] =
                        a.data_[r1 * da + c1] * b.data_[r2 * db + c2];
    return QState::density(num_qubits_ + other.num_qubits_, std::move(rho));
}

void QState::check_invariants(double tol) const {
    if (pure_) {
        double norm2 = 0;
        for (const cd& a : data_) norm2 += std::norm(a);
        if (std::abs(norm2 - 1.0) > tol) throw DimensionError("pure state norm is not 1");
        return;
    }
    if (!is_hermitian(data_, tol)) throw DimensionError("density matrix not Hermitian");
    cd tr = matrix_trace(data_);
    if (std::abs(tr - cd{1}) > tol) throw DimensionError("density matrix trace is not 1");
    if (!is_psd(data_, -tol)) throw DimensionError("density matrix not PSD");
}

QState apply_gate(QState state, const Gate& gate) {
    Matrix m = gate_matrix(gate);
    const int n = state.num_qubits();
    if (state.is_pure()) {
        Matrix amps = state.amplitudes();
        apply_gate_amps(amps, n, gate.targets, m, false);
        QState out = QState::pure(n, std::move(amps));
        return out;
    }
    // rho -> G rho G^dagger; the row-major density matrix is a 2n-qubit
    // amplitude vector with row qubits 0..n-1 and column qubits n..2n-1.
    Matrix rho = state.rho();
    apply_gate_amps(rho, 2 * n, gate.targets, m, false);
    std::vector<int> col_targets(gate.targets);
    for (int& t : col_targets) t += n;
    apply_gate_amps(rho, 2 * n, col_targets, m, true);
    return QState::density(n, std::move(rho));
}

QState apply_unitary(const QState& state, const UnitaryDescriptor& u) {
    if (u.is_bottom()) throw Error("apply_unitary on BOTTOM");
    if (u.arity() != state.num_qubits()) throw DimensionError("unitary arity != state width");
    QState out = state;
    for (const auto& g : u.gates()) out = apply_gate(std::move(out), g);
    return out;
}

double prefix_probability(const QState& state, const Bits& outcome) {
    const int l = static_cast<int>(outcome.size());
    if (l < 0 || l > state.num_qubits()) throw DimensionError("prefix length out of range");
    if (l == 0) return 1.0;
    const uint64_t o = outcome_to_prefix(outcome);
    const uint64_t block = uint64_t{1} << (state.num_qubits() - l);
    const uint64_t start = o * block;
    double p = 0;
    if (state.is_pure()) {
        const auto& a = state.amplitudes();
        for (uint64_t i = start; i < start + block; ++i) p += std::norm(a[i]);
    } else {
        const auto& rho = state.rho();
        const size_t d = state.dim();
        for (uint64_t i = start; i < start + block; ++i) p += rho[i * d + i].real();
    }
    return p;
}

namespace {

QState collapse_prefix(const QState& state, int l, uint64_t o, double p) {
    const uint64_t block = uint64_t{1} << (state.num_qubits() - l);
    const uint64_t start = o * block;
    if (state.is_pure()) {
        Matrix amps(state.dim(), cd{0});
        const auto& a = state.amplitudes();
        const double scale = 1.0 / std::sqrt(p);
        for (uint64_t i = start; i < start + block; ++i) amps[i] = a[i] * scale;
        return QState::pure(state.num_qubits(), std::move(amps));
    }
    const size_t d = state.dim();
    Matrix rho(d * d, cd{0});
    const auto& in = state.rho();
    const double scale = 1.0 / p;
    for (uint64_t r = start; r < start + block; ++r)
        for (uint64_t c = start; c < start + block; ++c)
            rho[r * d + c] = in[r * d + c] * scale;
    return QState::density(state.num_qubits(), std::move(rho));
}

}  // namespace

std::pair<Bits, QState> measure_prefix(const QState& state, int l, Rng& rng) {
    if (l < 0 || l > state.num_qubits()) throw DimensionError("measure_prefix: l out of range");
    if (l == 0) return {Bits{}, state};
    const uint64_t outcomes = uint64_t{1} << l;
    std::vector<double> probs(outcomes);
    for (uint64_t o = 0; o < outcomes; ++o) probs[o] = prefix_probability(state, prefix_to_outcome(o, l));
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    double u = dist(rng);
    double acc = 0;
    uint64_t picked = outcomes - 1;
    for (uint64_t o = 0; o < outcomes; ++o) {
        acc += probs[o];
        if (u < acc) {
            picked = o;
            break;
        }
    }
    // Guard against picking a zero-probability tail bucket from rounding.
    while (probs[picked] <= 0 && picked > 0) --picked;
    return {prefix_to_outcome(picked, l), collapse_prefix(state, l, picked, probs[picked])};
}

std::pair<double, QState> measure_prefix_forced(const QState& state, int l, const Bits& outcome) {
    if (static_cast<int>(outcome.size()) != l) throw DimensionError("forced outcome length != l");
    if (l == 0) return {1.0, state};
    double p = prefix_probability(state, outcome);
    if (p < 1e-12) throw ImpossibleBranch("forced measurement branch has zero probability");
    return {p, collapse_prefix(state, l, outcome_to_prefix(outcome), p)};
}

QState reset_prefix(const QState& state, int l, const Bits& outcome) {
    if (l == 0) return state;
    const uint64_t o = outcome_to_prefix(outcome);
    if (o == 0) return state;
    const uint64_t block = uint64_t{1} << (state.num_qubits() - l);
    const uint64_t start = o * block;
    if (state.is_pure()) {
        Matrix amps(state.dim(), cd{0});
        const auto& a = state.amplitudes();
        for (uint64_t i = 0; i < block; ++i) amps[i] = a[start + i];
        return QState::pure(state.num_qubits(), std::move(amps));
    }
    const size_t d = state.dim();
    Matrix rho(d * d, cd{0});
    const auto& in = state.rho();
    for (uint64_t r = 0; r < block; ++r)
        for (uint64_t c = 0; c < block; ++c)
            rho[r * d + c] = in[(start + r) * d + (start + c)];
    return QState::density(state.num_qubits(), std::move(rho));
}

HybridState run_block(const HybridState& hs, const Postprocess& f, Rng& rng) {
    if (hs.unitary.is_bottom()) throw Error("run_block on BOTTOM unitary");
    const int m = hs.quantum.num_qubits();
    QState evolved = apply_unitary(hs.quantum, hs.unitary);
    auto [outcome, collapsed] = measure_prefix(evolved, hs.measure_count, rng);
    PostprocessResult r = f(hs.classical, hs.unitary, hs.measure_count, outcome);
    if (r.next_measure_count < 0 || r.next_measure_count > m)
        throw PostprocessError("post-processing returned l' outside [0, M]");
    if (!r.next_unitary.is_bottom() && r.next_unitary.arity() != m)
        throw PostprocessError("post-processing returned unitary of wrong arity");
    QState reset = reset_prefix(collapsed, hs.measure_count, outcome);
    return HybridState{std::move(r.classical), std::move(r.next_unitary), r.next_measure_count,
                       std::move(reset)};
}

ChannelOutput run_channel(HybridState hs, const Postprocess& f, Rng& rng, int max_blocks) {
    if (max_blocks < 1) throw ConfigError("run_channel: max_blocks must be >= 1");
    int blocks = 0;
    while (!hs.unitary.is_bottom()) {
        if (blocks >= max_blocks)
            throw NonTermination("channel did not halt within the block budget");
        hs = run_block(hs, f, rng);
        ++blocks;
    }
    return ChannelOutput{hs.classical, hs.measure_count, std::move(hs.quantum), blocks};
}

QState maximally_mixed(int m) {
    if (m < 0) throw DimensionError("maximally_mixed: negative width");
    return QState::maximally_mixed_state(m);
}

double povm_prob(const Matrix& effect, const QState& state) {
    const size_t d = matrix_dim(effect);
    if (d != state.dim()) throw DimensionError("effect dimension != state dimension");
    if (!is_hermitian(effect, 1e-9)) throw InvalidEffect("effect is not Hermitian");
    auto evs = hermitian_eigenvalues(effect);
    if (evs.front() < -1e-9 || evs.back() > 1.0 + 1e-9)
        throw InvalidEffect("effect eigenvalues outside [0, 1]");
    cd acc{0};
    if (state.is_pure()) {
        const auto& a = state.amplitudes();
        for (size_t r = 0; r < d; ++r) {
            cd row{0};
            for (size_t c = 0; c < d; ++c) row += effect[r * d + c] * a[c];
            acc += std::conj(a[r]) * row;
        }
    } else {
        const auto& rho = state.rho();
        for (size_t r = 0; r < d; ++r)
            for (size_t c = 0; c < d; ++c) acc += effect[r * d + c] * rho[c * d + r];
    }
    return acc.real();
}

size_t matrix_dim(const Matrix& m) {
    size_t d = static_cast<size_t>(std::llround(std::sqrt(static_cast<double>(m.size()))));
    if (d * d != m.size()) throw DimensionError("matrix is not square");
    return d;
}

Matrix matrix_mul(const Matrix& a, const Matrix& b) {
    const size_t d = matrix_dim(a);
    if (matrix_dim(b) != d) throw DimensionError("matrix_mul shape mismatch");
    Matrix out(d * d, cd{0});
    for (size_t r = 0; r < d; ++r)
        for (size_t k = 0; k < d; ++k) {
            cd v = a[r * d + k];
            if (v == cd{0}) continue;
            for (size_t c = 0; c < d; ++c) out[r * d + c] += v * b[k * d + c];
        }
    return out;
}

Matrix matrix_adjoint(const Matrix& m) {
    const size_t d = matrix_dim(m);
    Matrix out(d * d);
    for (size_t r = 0; r < d; ++r)
        for (size_t c = 0; c < d; ++c) out[c * d + r] = std::conj(m[r * d + c]);
    return out;
}

cd matrix_trace(const Matrix& m) {
    const size_t d = matrix_dim(m);
    cd tr{0};
    for (size_t i = 0; i < d; ++i) tr += m[i * d + i];
    return tr;
}

bool is_hermitian(const Matrix& m, double tol) {
    const size_t d = matrix_dim(m);
    for (size_t r = 0; r < d; ++r)
        for (size_t c = r; c < d; ++c)
            if (std::abs(m[r * d + c] - std::conj(m[c * d + r])) > tol) return false;
    return true;
}

bool is_unitary_matrix(const Matrix& m, double tol) {
    const size_t d = matrix_dim(m);
    Matrix p = matrix_mul(matrix_adjoint(m), m);
    for (size_t r = 0; r < d; ++r)
        for (size_t c = 0; c < d; ++c) {
            cd want = (r == c) ? cd{1} : cd{0};
            if (std::abs(p[r * d + c] - want) > tol) return false;
        }
    return true;
}

std::vector<double> hermitian_eigenvalues(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(to_eigen(m),
                                                           Eigen::EigenvaluesOnly);
    const auto& evs = solver.eigenvalues();
    std::vector<double> out(evs.size());
    for (Eigen::Index i = 0; i < evs.size(); ++i) out[i] = evs[i];
    std::sort(out.begin(), out.end());
    return out;
}

bool is_psd(const Matrix& m, double floor) {
    return hermitian_eigenvalues(m).front() >= floor;
}

Matrix identity_matrix(size_t dim) {
    Matrix m(dim * dim, cd{0});
    for (size_t i = 0; i < dim; ++i) m[i * dim + i] = 1;
    return m;
}

Matrix random_effect(int m, Rng& rng) {
    const size_t d = size_t{1} << m;
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix g(d * d);
    for (auto& v : g) v = cd{gauss(rng), gauss(rng)};
    Matrix h = matrix_mul(matrix_adjoint(g), g);
    double top = hermitian_eigenvalues(h).back();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double scale = (top > 0) ? unif(rng) / top : 0.0;
    for (auto& v : h) v *= scale;
    return h;
}

QState random_density(int m, Rng& rng) {
    const size_t d = size_t{1} << m;
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix g(d * d);
    for (auto& v : g) v = cd{gauss(rng), gauss(rng)};
    Matrix h = matrix_mul(matrix_adjoint(g), g);
    cd tr = matrix_trace(h);
    for (auto& v : h) v /= tr;
    return QState::density(m, std::move(h));
}

QState random_pure(int m, Rng& rng) {
    const size_t d = size_t{1} << m;
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix a(d);
    double norm2 = 0;
    for (auto& v : a) {
        v = cd{gauss(rng), gauss(rng)};
        norm2 += std::norm(v);
    }
    const double scale = 1.0 / std::sqrt(norm2);
    for (auto& v : a) v *= scale;
    return QState::pure(m, std::move(a));
}

std::vector<uint8_t> dump_state(const QState& state) {
    if (!state.is_pure()) throw ModeError("dump_state expects a statevector");
    std::vector<uint8_t> out;
    out.reserve(8 + state.dim() * 16);
    out.insert(out.end(), {'Q', 'S', 'T', '1'});
    uint32_t n = static_cast<uint32_t>(state.num_qubits());
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((n >> (8 * i)) & 0xff));
    for (const cd& a : state.amplitudes()) {
        double parts[2] = {a.real(), a.imag()};
        uint8_t buf[16];
        std::memcpy(buf, parts, 16);
        out.insert(out.end(), buf, buf + 16);
    }
    return out;
}

QState load_state(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), "QST1", 4) != 0)
        throw FormatError("bad QST1 header");
    uint32_t n = 0;
    for (int i = 0; i < 4; ++i) n |= static_cast<uint32_t>(bytes[4 + i]) << (8 * i);
    const size_t dim = size_t{1} << n;
    if (bytes.size() != 8 + dim * 16) throw FormatError("QST1 payload length mismatch");
    Matrix amps(dim);
    for (size_t i = 0; i < dim; ++i) {
        double parts[2];
        std::memcpy(parts, bytes.data() + 8 + i * 16, 16);
        amps[i] = cd{parts[0], parts[1]};
    }
    return QState::pure(static_cast<int>(n), std::move(amps));
}

void QubitBudget::allocate(int qubits) {
    if (qubits < 0) throw BudgetError("negative allocation");
    used_ += qubits;
    peak_ = std::max(peak_, used_);
    if (used_ > limit_) throw BudgetError("qubit budget exceeded");
}

void QubitBudget::release(int qubits) {
    if (qubits < 0 || qubits > used_) throw BudgetError("bad release");
    used_ -= qubits;
}

}  // namespace qzk
