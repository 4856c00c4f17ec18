#include "qzk/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace qzk {

std::vector<F2Vec> f2_rref(std::vector<F2Vec> rows) {
    std::vector<F2Vec> out;
    rows.erase(std::remove(rows.begin(), rows.end(), 0u), rows.end());
    // Forward elimination, pivoting on the most significant set bit.
    for (int bit = 31; bit >= 0; --bit) {
        const F2Vec mask = F2Vec{1} << bit;
        auto it = std::find_if(rows.begin(), rows.end(), [&](F2Vec r) { return r & mask; });
        if (it == rows.end()) continue;
        F2Vec pivot = *it;
        rows.erase(it);
        for (auto& r : rows)
            if (r & mask) r ^= pivot;
        for (auto& r : out)
            if (r & mask) r ^= pivot;
        out.push_back(pivot);
        rows.erase(std::remove(rows.begin(), rows.end(), 0u), rows.end());
    }
    return out;  // pivots strictly decreasing
}

int f2_rank(const std::vector<F2Vec>& rows) {
    return static_cast<int>(f2_rref(rows).size());
}

Subspace::Subspace(int ambient_dim, std::vector<F2Vec> basis_rows) : n_(ambient_dim) {
    if (n_ < 0 || n_ > 31) throw DimensionError("ambient dimension out of range");
    for (F2Vec r : basis_rows)
        if (n_ < 31 && (r >> n_) != 0) throw DimensionError("basis row exceeds ambient dimension");
    const size_t given = basis_rows.size();
    rows_ = f2_rref(std::move(basis_rows));
    if (rows_.size() != given) throw DimensionError("basis rows are linearly dependent");
    k_ = static_cast<int>(rows_.size());
}

bool Subspace::contains(F2Vec v) const {
    // Reduce v by the RREF rows.
    for (F2Vec r : rows_) {
        const F2Vec top = F2Vec{1} << (31 - __builtin_clz(r));
        if (v & top) v ^= r;
    }
    return v == 0;
}

std::vector<F2Vec> Subspace::members() const {
    std::vector<F2Vec> out(size_t{1} << k_, 0);
    for (size_t combo = 0; combo < out.size(); ++combo) {
        F2Vec v = 0;
        for (int i = 0; i < k_; ++i)
            if ((combo >> i) & 1) v ^= rows_[i];
        out[combo] = v;
    }
    return out;
}

std::vector<uint8_t> Subspace::serialize() const {
    std::vector<uint8_t> out{'S', 'U', 'B', '1'};
    auto push_u16 = [&](uint16_t v) {
        out.push_back(static_cast<uint8_t>(v & 0xff));
        out.push_back(static_cast<uint8_t>(v >> 8));
    };
    push_u16(static_cast<uint16_t>(n_));
    push_u16(static_cast<uint16_t>(k_));
    const size_t row_bytes = (static_cast<size_t>(n_) + 7) / 8;
    for (F2Vec r : rows_) {
        std::vector<uint8_t> bytes(row_bytes, 0);
        for (int j = 0; j < n_; ++j) {
            // coordinate j lives in mask bit (n-1-j)
            if ((r >> (n_ - 1 - j)) & 1) bytes[j / 8] |= static_cast<uint8_t>(1u << (j % 8));
        }
        out.insert(out.end(), bytes.begin(), bytes.end());
    }
    return out;
}

Subspace Subspace::deserialize(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), "SUB1", 4) != 0)
        throw FormatError("bad SUB1 header");
    const int n = bytes[4] | (bytes[5] << 8);
    const int k = bytes[6] | (bytes[7] << 8);
    const size_t row_bytes = (static_cast<size_t>(n) + 7) / 8;
    if (bytes.size() != 8 + row_bytes * static_cast<size_t>(k))
        throw FormatError("SUB1 payload length mismatch");
    std::vector<F2Vec> rows(k, 0);
    for (int i = 0; i < k; ++i) {
        const uint8_t* row = bytes.data() + 8 + i * row_bytes;
        for (int j = 0; j < n; ++j)
            if ((row[j / 8] >> (j % 8)) & 1) rows[i] |= F2Vec{1} << (n - 1 - j);
    }
    return Subspace(n, std::move(rows));
}

Subspace sample_subspace(int n, int k, Rng& rng) {
    if (k < 0 || k > n) throw DimensionError("sample_subspace: k out of range");
    if (n > 31) throw DimensionError("sample_subspace: n too large");
    const F2Vec row_mask = (n == 31) ? 0x7fffffffu : ((F2Vec{1} << n) - 1);
    // Rejection sampling: random k x n matrices until full rank, then RREF.
    while (true) {
        std::vector<F2Vec> rows(k);
        for (auto& r : rows) r = static_cast<F2Vec>(rng()) & row_mask;
        if (f2_rank(rows) == k) return Subspace(n, f2_rref(std::move(rows)));
    }
}

QState prepare_state(const Subspace& a) {
    if (a.ambient_dim() > 12) throw DimensionError("prepare_state: ambient dim > 12");
    const size_t dim = size_t{1} << a.ambient_dim();
    Matrix amps(dim, cd{0});
    const double amp = std::pow(2.0, -0.5 * a.dim());
    for (F2Vec x : a.members()) amps[x] = amp;
    return QState::pure(a.ambient_dim(), std::move(amps));
}

std::optional<std::vector<F2Vec>> orthonormal_basis(const Subspace& a) {
    const int k = a.dim();
    std::vector<F2Vec> chosen;
    std::vector<F2Vec> work = a.basis();  // spans the orthogonal complement of `chosen` within A

    auto span_of = [](const std::vector<F2Vec>& basis) {
        std::vector<F2Vec> out;
        out.reserve(size_t{1} << basis.size());
        for (size_t combo = 0; combo < (size_t{1} << basis.size()); ++combo) {
            F2Vec v = 0;
            for (size_t i = 0; i < basis.size(); ++i)
                if ((combo >> i) & 1) v ^= basis[i];
            out.push_back(v);
        }
        return out;
    };
    // Basis of {x in span(work) : <x, v> = 0} for v with a nonzero functional.
    auto complement = [](std::vector<F2Vec> basis, F2Vec v) {
        std::vector<F2Vec> out;
        F2Vec pivot = 0;
        for (F2Vec w : basis) {
            if (f2_inner(w, v)) {
                if (!pivot) {
                    pivot = w;
                    continue;
                }
                w ^= pivot;
            }
            if (w) out.push_back(w);
        }
        return out;
    };

    while (!work.empty()) {
        F2Vec odd = 0;
        for (F2Vec v : span_of(work))
            if (v && f2_parity(v)) {
                odd = v;
                break;
            }
        if (odd) {
            chosen.push_back(odd);
            work = complement(std::move(work), odd);
            continue;
        }
        // Alternating remainder: repair with a hyperbolic pair if a previous
        // choice exists, otherwise no orthonormal basis exists.
        if (chosen.empty()) return std::nullopt;
        F2Vec x = 0, y = 0;
        auto span = span_of(work);
        for (F2Vec cx : span) {
            if (!cx) continue;
            for (F2Vec cy : span)
                if (cy && f2_inner(cx, cy)) {
                    x = cx;
                    y = cy;
                    break;
                }
            if (x) break;
        }
        if (!x) return std::nullopt;  // form degenerate on the remainder
        F2Vec u = chosen.back();
        chosen.pop_back();
        chosen.push_back(u ^ x);
        chosen.push_back(u ^ y);
        chosen.push_back(u ^ x ^ y);
        work = complement(std::move(work), x);
        work = complement(std::move(work), y);
    }

    if (static_cast<int>(chosen.size()) != k) return std::nullopt;
    for (size_t i = 0; i < chosen.size(); ++i) {
        if (!f2_parity(chosen[i]) || !a.contains(chosen[i])) return std::nullopt;
        for (size_t j = i + 1; j < chosen.size(); ++j)
            if (f2_inner(chosen[i], chosen[j])) return std::nullopt;
    }
    if (f2_rank(chosen) != k) return std::nullopt;
    return chosen;
}

UnitaryDescriptor build_CA_from_basis(int n, const std::vector<F2Vec>& basis) {
    const int k = static_cast<int>(basis.size());
    for (size_t i = 0; i < basis.size(); ++i) {
        if (!f2_parity(basis[i]))
            throw BasisNotOrthonormal("basis vector has even weight");
        for (size_t j = i + 1; j < basis.size(); ++j)
            if (f2_inner(basis[i], basis[j]))
                throw BasisNotOrthonormal("basis vectors are not orthogonal");
    }
    UnitaryDescriptor u(k + n);
    for (int i = 0; i < k; ++i) u.append(Gate::h(i));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < n; ++j)
            if ((basis[i] >> (n - 1 - j)) & 1) u.append(Gate::cnot(i, k + j));
    // Inner-product uncompute; relies on the basis orthonormality.
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < n; ++j)
            if ((basis[i] >> (n - 1 - j)) & 1) u.append(Gate::cnot(k + j, i));
    return u;
}

UnitaryDescriptor build_CA(const Subspace& a) {
    return build_CA_from_basis(a.ambient_dim(), a.basis());
}

namespace {

// In-place U_A on an amplitude vector over n+1 qubits (flag is the last qubit).
void apply_ua_amps(Matrix& amps, const Subspace& a) {
    const double amp = std::pow(2.0, -0.5 * a.dim());
    const auto members = a.members();
    cd c0{0}, c1{0};
    for (F2Vec x : members) {
        c0 += amp * amps[2 * static_cast<uint64_t>(x)];
        c1 += amp * amps[2 * static_cast<uint64_t>(x) + 1];
    }
    const cd d0 = c1 - c0, d1 = c0 - c1;
    for (F2Vec x : members) {
        amps[2 * static_cast<uint64_t>(x)] += amp * d0;
        amps[2 * static_cast<uint64_t>(x) + 1] += amp * d1;
    }
}

}  // namespace

QState SubspaceOracleHandle::apply_ua(const QState& state) {
    if (state.num_qubits() != a_.ambient_dim() + 1)
        throw DimensionError("apply_ua expects n+1 qubits");
    ++queries_;
    if (state.is_pure()) {
        Matrix amps = state.amplitudes();
        apply_ua_amps(amps, a_);
        return QState::pure(state.num_qubits(), std::move(amps));
    }
    // U_A is a real symmetric involution, so conjugation is column transforms
    // followed by row transforms with the same action.
    const size_t d = state.dim();
    Matrix rho = state.rho();
    Matrix col(d);
    for (size_t c = 0; c < d; ++c) {
        for (size_t r = 0; r < d; ++r) col[r] = rho[r * d + c];
        apply_ua_amps(col, a_);
        for (size_t r = 0; r < d; ++r) rho[r * d + c] = col[r];
    }
    for (size_t r = 0; r < d; ++r) {
        for (size_t c = 0; c < d; ++c) col[c] = std::conj(rho[r * d + c]);
        apply_ua_amps(col, a_);
        for (size_t c = 0; c < d; ++c) rho[r * d + c] = std::conj(col[c]);
    }
    return QState::density(state.num_qubits(), std::move(rho));
}

namespace {

// Splits off the last qubit: probability of reading `bit`, and the reduced
// state on the first n qubits after that reading.
std::pair<double, QState> take_last_qubit(const QState& state, int bit) {
    const size_t half = state.dim() / 2;
    if (state.is_pure()) {
        const auto& a = state.amplitudes();
        double p = 0;
        for (size_t j = 0; j < half; ++j) p += std::norm(a[2 * j + bit]);
        Matrix out(half, cd{0});
        if (p > 0) {
            const double scale = 1.0 / std::sqrt(p);
            for (size_t j = 0; j < half; ++j) out[j] = a[2 * j + bit] * scale;
        } else {
            out[0] = 1;  // unreachable branch placeholder; callers sample by p
        }
        return {p, QState::pure(state.num_qubits() - 1, std::move(out))};
    }
    const auto& rho = state.rho();
    const size_t d = state.dim();
    double p = 0;
    for (size_t j = 0; j < half; ++j) p += rho[(2 * j + bit) * d + (2 * j + bit)].real();
    Matrix out(half * half, cd{0});
    if (p > 0) {
        for (size_t r = 0; r < half; ++r)
            for (size_t c = 0; c < half; ++c)
                out[r * half + c] = rho[(2 * r + bit) * d + (2 * c + bit)] / p;
    } else {
        out[0] = 1;
    }
    return {p, QState::density(state.num_qubits() - 1, std::move(out))};
}

}  // namespace

TestResult test_state(SubspaceOracleHandle& h, const QState& rho, Rng& rng) {
    if (rho.num_qubits() != h.ambient_dim())
        throw DimensionError("test_state expects an n-qubit state");
    QState with_flag = rho.tensor(QState::zero(1));
    QState queried = h.apply_ua(with_flag);
    auto [p1, post1] = take_last_qubit(queried, 1);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    if (dist(rng) < p1) return TestResult{1, std::move(post1)};
    auto [p0, post0] = take_last_qubit(queried, 0);
    (void)p0;
    return TestResult{0, std::move(post0)};
}

double project_A_probability(const Subspace& a, const QState& rho) {
    return rho.fidelity_with(prepare_state(a));
}

ProjectResult project_A_direct(const Subspace& a, const QState& rho, Rng& rng) {
    if (a.ambient_dim() != rho.num_qubits()) throw DimensionError("project_A dim mismatch");
    const QState target = prepare_state(a);
    const double p0 = rho.fidelity_with(target);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    const bool hit = dist(rng) < p0;
    if (rho.is_pure()) {
        const auto& psi = rho.amplitudes();
        const auto& t = target.amplitudes();
        cd ov{0};
        for (size_t i = 0; i < psi.size(); ++i) ov += std::conj(t[i]) * psi[i];
        if (hit) {
            Matrix amps(psi.size(), cd{0});
            const cd phase = ov / std::abs(ov);
            for (size_t i = 0; i < psi.size(); ++i) amps[i] = phase * t[i];
            return ProjectResult{0, QState::pure(rho.num_qubits(), std::move(amps))};
        }
        Matrix amps(psi.size());
        for (size_t i = 0; i < psi.size(); ++i) amps[i] = psi[i] - ov * t[i];
        double norm2 = 0;
        for (const cd& v : amps) norm2 += std::norm(v);
        const double scale = 1.0 / std::sqrt(norm2);
        for (cd& v : amps) v *= scale;
        return ProjectResult{1, QState::pure(rho.num_qubits(), std::move(amps))};
    }
    const size_t d = rho.dim();
    const auto& r = rho.rho();
    const auto& t = target.amplitudes();
    if (hit) return ProjectResult{0, target};
    // (I-P) rho (I-P) / (1-p0), with w = rho |A>.
    Matrix w(d, cd{0});
    for (size_t i = 0; i < d; ++i)
        for (size_t j = 0; j < d; ++j) w[i] += r[i * d + j] * t[j];
    Matrix out(d * d);
    for (size_t i = 0; i < d; ++i)
        for (size_t j = 0; j < d; ++j)
            out[i * d + j] = (r[i * d + j] - t[i] * std::conj(w[j]) - w[i] * std::conj(t[j]) +
                              p0 * t[i] * std::conj(t[j])) /
                             (1.0 - p0);
    return ProjectResult{1, QState::density(rho.num_qubits(), std::move(out))};
}

ProjectResult project_A_circuit(const Subspace& a, const QState& rho, Rng& rng) {
    if (a.ambient_dim() != rho.num_qubits()) throw DimensionError("project_A dim mismatch");
    auto onb = orthonormal_basis(a);
    if (!onb) throw BasisNotOrthonormal("subspace admits no orthonormal basis");
    const int n = a.ambient_dim();
    const int k = a.dim();
    UnitaryDescriptor ca = build_CA_from_basis(n, *onb);
    // C_A is made of involutions, so the inverse is the reversed gate list.
    UnitaryDescriptor ca_dag(k + n);
    for (auto it = ca.gates().rbegin(); it != ca.gates().rend(); ++it) ca_dag.append(*it);

    QState work = QState::zero(k).tensor(rho);
    work = apply_unitary(work, ca_dag);
    // Binary projective measurement {|0...0><0...0|, rest} over all k+n qubits.
    const double p0 = work.basis_probability(0);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    const bool hit = dist(rng) < p0;
    if (hit) return ProjectResult{0, prepare_state(a)};
    const size_t d = work.dim();
    const size_t keep = size_t{1} << n;  // X register ends up |0^k>, the leading block
    if (work.is_pure()) {
        Matrix amps = work.amplitudes();
        amps[0] = 0;
        double norm2 = 0;
        for (const cd& v : amps) norm2 += std::norm(v);
        const double s = 1.0 / std::sqrt(norm2);
        for (cd& v : amps) v *= s;
        QState collapsed = QState::pure(k + n, std::move(amps));
        collapsed = apply_unitary(collapsed, ca);
        Matrix post(collapsed.amplitudes().begin(), collapsed.amplitudes().begin() + keep);
        double block = 0;
        for (const cd& v : post) block += std::norm(v);
        const double bs = 1.0 / std::sqrt(block);
        for (cd& v : post) v *= bs;
        return ProjectResult{1, QState::pure(n, std::move(post))};
    }
    // Density route: zero the |0...0> row/column, renormalize, undo C_A, keep Y.
    Matrix m = work.rho();
    for (size_t i = 0; i < d; ++i) {
        m[i] = 0;
        m[i * d] = 0;
    }
    cd tr = matrix_trace(m);
    for (cd& v : m) v /= tr;
    QState collapsed = QState::density(k + n, std::move(m));
    collapsed = apply_unitary(collapsed, ca);
    const auto& full = collapsed.rho();
    Matrix post(keep * keep);
    for (size_t r = 0; r < keep; ++r)
        for (size_t c = 0; c < keep; ++c) post[r * keep + c] = full[r * d + c];
    // X stays |0^k> up to numerical dust; renormalize the kept block.
    cd keep_tr{0};
    for (size_t i = 0; i < keep; ++i) keep_tr += post[i * keep + i];
    for (cd& v : post) v /= keep_tr;
    return ProjectResult{1, QState::density(n, std::move(post))};
}

ProjectResult project_A(const Subspace& a, const QState& rho, Rng& rng) {
    // Default to the direct projector: exact at desk scale, defined for every
    // subspace, and cheap on density inputs. The ancilla route stays exposed
    // and is cross-checked against this one where its basis exists.
    return project_A_direct(a, rho, rng);
}

CloneReport clone_experiment(const std::string& strategy, int n, int trials, Rng& rng) {
    if (n <= 0 || n % 2 != 0) throw ConfigError("clone_experiment needs even n > 0");
    int grover_budget = -1;
    if (strategy == "measure_and_resend" || strategy == "identity_pad") {
        // no parameters
    } else if (strategy.rfind("oracle_grover_budget(", 0) == 0 && strategy.back() == ')') {
        grover_budget = std::stoi(strategy.substr(21, strategy.size() - 22));
        if (grover_budget < 0) throw ConfigError("negative grover budget");
    } else {
        throw ConfigError("unknown cloning strategy: " + strategy);
    }

    const int k = n / 2;
    CloneReport report;
    report.strategy = strategy;
    report.n = n;
    report.trials = trials;
    std::uniform_real_distribution<double> dist(0.0, 1.0);

    for (int t = 0; t < trials; ++t) {
        Subspace a = sample_subspace(n, k, rng);
        SubspaceOracleHandle handle(a);
        const QState target = prepare_state(OracleSecretAccess::subspace(handle));

        double p = 0;  // Tr(|A><A|^{x2} on the produced two-register state)
        if (strategy == "measure_and_resend") {
            // Measuring |A> yields a uniform member x; output |x>|x>.
            auto members = a.members();
            F2Vec x = members[rng() % members.size()];
            const QState copy = QState::basis(n, x);
            p = copy.fidelity_with(target) * copy.fidelity_with(target);
        } else if (strategy == "identity_pad") {
            const QState zero = QState::zero(n);
            p = 1.0 * zero.fidelity_with(target);
        } else {
            // Amplitude amplification of a second copy from the uniform state,
            // reflecting about |A> through the oracle (flag prepared in |->).
            const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
            QState flag = QState::pure(1, Matrix{inv_sqrt2, -inv_sqrt2});
            QState psi = QState::zero(n);
            UnitaryDescriptor all_h(n);
            for (int q = 0; q < n; ++q) all_h.append(Gate::h(q));
            psi = apply_unitary(psi, all_h);
            for (int it = 0; it < grover_budget; ++it) {
                QState with_flag = psi.tensor(flag);
                with_flag = handle.apply_ua(with_flag);
                // Drop the unentangled |-> flag.
                Matrix amps(size_t{1} << n);
                const auto& full = with_flag.amplitudes();
                for (size_t j = 0; j < amps.size(); ++j) amps[j] = full[2 * j] / inv_sqrt2;
                psi = QState::pure(n, std::move(amps));
                // Diffusion about the uniform state: H^n (2|0><0| - I) H^n.
                psi = apply_unitary(psi, all_h);
                Matrix a2 = psi.amplitudes();
                for (size_t j = 1; j < a2.size(); ++j) a2[j] = -a2[j];
                psi = QState::pure(n, std::move(a2));
                psi = apply_unitary(psi, all_h);
            }
            p = 1.0 * psi.fidelity_with(target);
        }

        report.mean_success_prob += p;
        if (dist(rng) < p) ++report.successes;
        report.total_queries += handle.query_counter();
    }
    report.mean_success_prob /= std::max(1, trials);
    report.success_rate = static_cast<double>(report.successes) / std::max(1, trials);
    return report;
}

}  // namespace qzk
