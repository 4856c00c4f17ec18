#include "qzk/wi.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>

namespace qzk {

Graph::Graph(int n, bool directed) : n_(n), directed_(directed) {
    if (n < 0 || n > 4096) throw DimensionError("graph size out of range");
    adj_.assign(static_cast<size_t>(n) * n, 0);
}

void Graph::add_edge(int u, int v) {
    if (u < 0 || v < 0 || u >= n_ || v >= n_) throw DimensionError("edge endpoint out of range");
    if (u == v) throw FormatError("self-loops are not allowed");
    adj_[static_cast<size_t>(u) * n_ + v] = 1;
    if (!directed_) adj_[static_cast<size_t>(v) * n_ + u] = 1;
}

Graph Graph::complete(int n) {
    Graph g(n);
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) g.add_edge(u, v);
    return g;
}

Graph Graph::cycle_graph(int n) {
    Graph g(n);
    for (int u = 0; u < n; ++u) g.add_edge(u, (u + 1) % n);
    return g;
}

Graph Graph::bowtie() {
    Graph g(5);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(2, 0);
    g.add_edge(2, 3);
    g.add_edge(3, 4);
    g.add_edge(4, 2);
    return g;
}

std::vector<uint8_t> Graph::serialize() const {
    std::vector<uint8_t> out{'G', 'R', 'A', '1'};
    out.push_back(directed_ ? 1 : 0);
    out.push_back(static_cast<uint8_t>(n_ & 0xff));
    out.push_back(static_cast<uint8_t>((n_ >> 8) & 0xff));
    Bits bits(adj_.begin(), adj_.end());
    auto packed = pack_bits(bits);
    out.insert(out.end(), packed.begin(), packed.end());
    return out;
}

Graph Graph::deserialize(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 7 || std::memcmp(bytes.data(), "GRA1", 4) != 0)
        throw FormatError("bad GRA1 header");
    const bool directed = bytes[4] != 0;
    const int n = bytes[5] | (bytes[6] << 8);
    const size_t nbits = static_cast<size_t>(n) * n;
    if (bytes.size() != 7 + (nbits + 7) / 8) throw FormatError("GRA1 payload length mismatch");
    Bits bits = unpack_bits(std::vector<uint8_t>(bytes.begin() + 7, bytes.end()), nbits);
    Graph g(n, directed);
    g.adj_.assign(bits.begin(), bits.end());
    for (int u = 0; u < n; ++u) {
        if (g.adj_[static_cast<size_t>(u) * n + u]) throw FormatError("self-loop in graph file");
        if (!directed)
            for (int v = 0; v < n; ++v)
                if (g.edge(u, v) != g.edge(v, u)) throw FormatError("asymmetric undirected graph");
    }
    return g;
}

bool is_hamiltonian_cycle(const Graph& g, const std::vector<int>& cycle) {
    const int n = g.vertices();
    if (static_cast<int>(cycle.size()) != n || n < 3) return false;
    std::vector<bool> seen(n, false);
    for (int v : cycle) {
        if (v < 0 || v >= n || seen[v]) return false;
        seen[v] = true;
    }
    for (int i = 0; i < n; ++i)
        if (!g.edge(cycle[i], cycle[(i + 1) % n])) return false;
    return true;
}

namespace {

bool ham_search(const Graph& g, std::vector<int>& path, std::vector<bool>& used) {
    const int n = g.vertices();
    if (static_cast<int>(path.size()) == n) return g.edge(path.back(), path.front());
    for (int v = 1; v < n; ++v) {
        if (used[v] || !g.edge(path.back(), v)) continue;
        used[v] = true;
        path.push_back(v);
        if (ham_search(g, path, used)) return true;
        path.pop_back();
        used[v] = false;
    }
    return false;
}

}  // namespace

std::optional<std::vector<int>> find_hamiltonian_cycle(const Graph& g) {
    const int n = g.vertices();
    if (n > 12) throw ConfigError("brute-force cycle search capped at 12 vertices");
    if (n < 3) return std::nullopt;
    std::vector<int> path{0};
    std::vector<bool> used(n, false);
    used[0] = true;
    if (ham_search(g, path, used)) return path;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Circuits.

BoolCircuit::BoolCircuit(int n_inputs, std::vector<CircuitGate> gates, int output)
    : n_inputs_(n_inputs), gates_(std::move(gates)), output_(output) {
    if (n_inputs < 0) throw FormatError("negative input count");
    for (size_t i = 0; i < gates_.size(); ++i) {
        const CircuitGate& g = gates_[i];
        const int limit = n_inputs_ + static_cast<int>(i);
        switch (g.op) {
            case CircuitOp::Const:
                if (g.a != 0 && g.a != 1) throw FormatError("bad constant");
                break;
            case CircuitOp::Not:
                if (g.a < 0 || g.a >= limit) throw FormatError("gate reads an undriven wire");
                break;
            case CircuitOp::And:
            case CircuitOp::Xor:
                if (g.a < 0 || g.a >= limit || g.b < 0 || g.b >= limit)
                    throw FormatError("gate reads an undriven wire");
                break;
        }
    }
    if (output_ < 0 || output_ >= n_inputs_ + static_cast<int>(gates_.size()))
        throw FormatError("output wire undriven");
}

bool BoolCircuit::eval(const Bits& assignment) const {
    if (static_cast<int>(assignment.size()) != n_inputs_)
        throw FormatError("assignment length mismatch");
    std::vector<uint8_t> wires(n_inputs_ + gates_.size());
    std::copy(assignment.begin(), assignment.end(), wires.begin());
    for (size_t i = 0; i < gates_.size(); ++i) {
        const CircuitGate& g = gates_[i];
        uint8_t v = 0;
        switch (g.op) {
            case CircuitOp::Const: v = static_cast<uint8_t>(g.a); break;
            case CircuitOp::Not: v = wires[g.a] ^ 1u; break;
            case CircuitOp::And: v = wires[g.a] & wires[g.b]; break;
            case CircuitOp::Xor: v = wires[g.a] ^ wires[g.b]; break;
        }
        wires[n_inputs_ + i] = v;
    }
    return wires[output_] != 0;
}

int CircuitBuilder::emit(CircuitOp op, int a, int b) {
    gates_.push_back(CircuitGate{op, a, b});
    return n_inputs_ + static_cast<int>(gates_.size()) - 1;
}

int CircuitBuilder::input(int i) const {
    if (i < 0 || i >= n_inputs_) throw FormatError("input index out of range");
    return i;
}

int CircuitBuilder::constant(int v) { return emit(CircuitOp::Const, v ? 1 : 0, 0); }
int CircuitBuilder::f_not(int a) { return emit(CircuitOp::Not, a, 0); }
int CircuitBuilder::f_and(int a, int b) { return emit(CircuitOp::And, a, b); }
int CircuitBuilder::f_xor(int a, int b) { return emit(CircuitOp::Xor, a, b); }
int CircuitBuilder::f_or(int a, int b) { return f_xor(f_xor(a, b), f_and(a, b)); }
int CircuitBuilder::f_eq(int a, int b) { return f_not(f_xor(a, b)); }

int CircuitBuilder::all_of(const std::vector<int>& wires) {
    if (wires.empty()) return constant(1);
    int acc = wires[0];
    for (size_t i = 1; i < wires.size(); ++i) acc = f_and(acc, wires[i]);
    return acc;
}

int CircuitBuilder::any_of(const std::vector<int>& wires) {
    if (wires.empty()) return constant(0);
    int acc = wires[0];
    for (size_t i = 1; i < wires.size(); ++i) acc = f_or(acc, wires[i]);
    return acc;
}

int CircuitBuilder::equals_const(const std::vector<int>& wires, uint64_t value) {
    std::vector<int> checks;
    for (size_t i = 0; i < wires.size(); ++i) {
        const int bit = (value >> i) & 1;
        checks.push_back(bit ? wires[i] : f_not(wires[i]));
    }
    return all_of(checks);
}

BoolCircuit CircuitBuilder::finish(int output) const {
    return BoolCircuit(n_inputs_, gates_, output);
}

namespace {

using Word = std::array<int, 64>;

Word word_const(CircuitBuilder& cb, uint64_t v) {
    const int zero = cb.constant(0);
    const int one = cb.constant(1);
    Word w;
    for (int i = 0; i < 64; ++i) w[i] = ((v >> i) & 1) ? one : zero;
    return w;
}

Word word_xor_const(CircuitBuilder& cb, const Word& a, uint64_t v) {
    Word w = a;
    for (int i = 0; i < 64; ++i)
        if ((v >> i) & 1) w[i] = cb.f_not(w[i]);
    return w;
}

Word word_xor(CircuitBuilder& cb, const Word& a, const Word& b) {
    Word w;
    for (int i = 0; i < 64; ++i) w[i] = cb.f_xor(a[i], b[i]);
    return w;
}

Word word_rotl(const Word& a, int r) {
    Word w;
    for (int i = 0; i < 64; ++i) w[(i + r) % 64] = a[i];
    return w;
}

Word word_add(CircuitBuilder& cb, const Word& a, const Word& b) {
    Word w;
    int carry = -1;
    for (int i = 0; i < 64; ++i) {
        const int t = cb.f_xor(a[i], b[i]);
        if (carry < 0) {
            w[i] = t;
            carry = cb.f_and(a[i], b[i]);
        } else {
            w[i] = cb.f_xor(t, carry);
            carry = cb.f_xor(cb.f_and(a[i], b[i]), cb.f_and(t, carry));
        }
    }
    return w;
}

Word arx_block_circuit(CircuitBuilder& cb, const Word& key, uint64_t counter) {
    const auto& spec = prg_detail::arx_spec();
    Word ks = word_xor_const(cb, key, spec.ks_init);
    Word v = word_const(cb, counter);
    for (int r = 0; r < prg_detail::ArxSpec::kRounds; ++r) {
        ks = word_add(cb, word_rotl(ks, spec.ks_rot), word_const(cb, spec.rc[r]));
        v = word_add(cb, v, ks);
        v = word_rotl(v, spec.rot[r]);
        v = word_xor(cb, v, word_rotl(ks, spec.mix_rot));
    }
    return v;
}

Word seed_key_word(CircuitBuilder& cb, const std::vector<int>& seed_wires) {
    const int zero = cb.constant(0);
    Word key;
    for (int i = 0; i < 64; ++i)
        key[i] = (i < static_cast<int>(seed_wires.size())) ? seed_wires[i] : zero;
    const uint64_t sep = static_cast<uint64_t>(seed_wires.size()) * prg_detail::arx_spec().len_mult;
    return word_xor_const(cb, key, sep);
}

}  // namespace

std::vector<int> prg_circuit(CircuitBuilder& cb, const std::vector<int>& seed_wires,
                             size_t out_len) {
    const Word key = seed_key_word(cb, seed_wires);
    std::vector<int> out(out_len);
    for (size_t base = 0; base < out_len; base += 64) {
        const Word block = arx_block_circuit(cb, key, base / 64);
        for (size_t j = base; j < std::min(out_len, base + 64); ++j) out[j] = block[j % 64];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Compound relation.

int trapdoor_payload_bits(int lambda) {
    int idx_bits = 1;
    while ((1 << idx_bits) < lambda) ++idx_bits;
    return idx_bits + lambda;
}

Bits encode_trapdoor_payload(int lambda, int i_star, const Bits& value) {
    if (static_cast<int>(value.size()) != lambda) throw FormatError("payload value length");
    int idx_bits = trapdoor_payload_bits(lambda) - lambda;
    Bits out = uint_to_bits(static_cast<uint64_t>(i_star), idx_bits);
    out.insert(out.end(), value.begin(), value.end());
    return out;
}

std::optional<TrapdoorWitness> decide_trapdoor(const WiInstance& xwi) {
    const int lambda = xwi.lambda;
    const size_t block = 3 * static_cast<size_t>(lambda);
    if (xwi.receiver_for_prover.r.size() != block) throw FormatError("receiver message length");
    if (xwi.c_star.c.size() != block * static_cast<size_t>(lambda))
        throw FormatError("c* has wrong length");
    if (static_cast<int>(xwi.alphas.size()) != lambda) throw FormatError("alpha table shape");
    const auto& dict = PrgDictionary::instance(lambda);

    // Per-bit candidate (bit, seed) pairs for c*, via PRG inversion.
    struct Cand {
        uint8_t bit;
        Bits seed;
    };
    std::vector<std::vector<Cand>> cands(lambda);
    for (int j = 0; j < lambda; ++j) {
        Bits blk(xwi.c_star.c.begin() + j * block, xwi.c_star.c.begin() + (j + 1) * block);
        for (const Bits& s : dict.seeds_for(blk)) cands[j].push_back({0, s});
        for (const Bits& s : dict.seeds_for(xor_bits(blk, xwi.receiver_for_prover.r)))
            cands[j].push_back({1, s});
        if (cands[j].empty()) return std::nullopt;
    }

    // Walk the (almost always singleton) candidate product.
    size_t combos = 1;
    for (const auto& c : cands) {
        combos *= c.size();
        if (combos > 256) {
            combos = 256;
            break;
        }
    }
    const int m = trapdoor_payload_bits(lambda);
    const int idx_bits = m - lambda;
    for (size_t combo = 0; combo < combos; ++combo) {
        size_t rem = combo;
        Bits r_star(lambda);
        std::vector<Bits> seeds(lambda);
        for (int j = 0; j < lambda; ++j) {
            const auto& pick = cands[j][rem % cands[j].size()];
            rem /= cands[j].size();
            r_star[j] = pick.bit;
            seeds[j] = pick.seed;
        }
        auto derived = derive_seeds(r_star, m);
        auto rec = recover_message(xwi.receiver_for_prover, xwi.c_star_star, derived);
        if (!rec) continue;
        const uint64_t i_star = bits_to_uint(Bits(rec->begin(), rec->begin() + idx_bits));
        if (i_star >= static_cast<uint64_t>(lambda)) continue;
        Bits value(rec->begin() + idx_bits, rec->end());
        if (value == xor_bits(xwi.alphas[i_star][0], xwi.alphas[i_star][1]))
            return TrapdoorWitness{std::move(r_star), std::move(seeds), static_cast<int>(i_star)};
    }
    return std::nullopt;
}

namespace {

int ceil_log2(int n) {
    int b = 1;
    while ((1 << b) < n) ++b;
    return b;
}

// value < bound over little-endian wires.
int less_than_const(CircuitBuilder& cb, const std::vector<int>& wires, uint64_t bound) {
    if (wires.size() < 64 && bound >= (uint64_t{1} << wires.size())) return cb.constant(1);
    int lt = cb.constant(0);
    int eq = cb.constant(1);
    for (int i = static_cast<int>(wires.size()) - 1; i >= 0; --i) {
        const int bit = (bound >> i) & 1;
        if (bit)
            lt = cb.f_or(lt, cb.f_and(eq, cb.f_not(wires[i])));
        const int match = bit ? wires[i] : cb.f_not(wires[i]);
        eq = cb.f_and(eq, match);
    }
    return lt;
}

}  // namespace

BoolCircuit build_compound_circuit(const WiInstance& xwi, CompoundLayout* layout_out) {
    const int lambda = xwi.lambda;
    const int n = xwi.x.vertices();
    if (n < 3) throw FormatError("instance graph too small");
    if (static_cast<int>(xwi.alphas.size()) != lambda) throw FormatError("alpha table shape");
    for (const auto& pair : xwi.alphas)
        for (const auto& v : pair)
            if (static_cast<int>(v.size()) != lambda) throw FormatError("alpha table shape");
    const size_t block = 3 * static_cast<size_t>(lambda);
    if (xwi.receiver_for_prover.r.size() != block) throw FormatError("receiver message length");
    if (xwi.c_star.c.size() != block * static_cast<size_t>(lambda))
        throw FormatError("c* has wrong length");
    const int m = trapdoor_payload_bits(lambda);
    const int idx_bits = m - lambda;
    if (xwi.c_star_star.c.size() != block * static_cast<size_t>(m))
        throw FormatError("c** has wrong length");

    CompoundLayout layout;
    layout.vertex_fields = n;
    layout.bits_per_field = ceil_log2(n);
    layout.r_star_offset = n * layout.bits_per_field;
    layout.seeds_offset = layout.r_star_offset + lambda;
    layout.i_star_offset = layout.seeds_offset + lambda * lambda;
    layout.total = layout.i_star_offset + idx_bits;
    if (layout_out) *layout_out = layout;

    CircuitBuilder cb(layout.total);

    // Left branch: the vertex fields spell a Hamiltonian cycle of x.
    std::vector<std::vector<int>> fields(n);
    for (int i = 0; i < n; ++i)
        for (int b = 0; b < layout.bits_per_field; ++b)
            fields[i].push_back(cb.input(i * layout.bits_per_field + b));
    std::vector<int> left_checks;
    // Every field is a vertex id.
    for (int i = 0; i < n; ++i) left_checks.push_back(less_than_const(cb, fields[i], n));
    // Fields are pairwise distinct.
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            std::vector<int> bits_eq;
            for (int b = 0; b < layout.bits_per_field; ++b)
                bits_eq.push_back(cb.f_eq(fields[i][b], fields[j][b]));
            left_checks.push_back(cb.f_not(cb.all_of(bits_eq)));
        }
    // Consecutive fields are edges of x.
    for (int i = 0; i < n; ++i) {
        std::vector<int> options;
        for (int u = 0; u < n; ++u)
            for (int v = 0; v < n; ++v)
                if (xwi.x.edge(u, v))
                    options.push_back(cb.f_and(cb.equals_const(fields[i], u),
                                               cb.equals_const(fields[(i + 1) % n], v)));
        left_checks.push_back(cb.any_of(options));
    }
    const int left_ok = cb.all_of(left_checks);

    // Right branch: the commitment equations with the PRG unrolled.
    std::vector<int> right_checks;
    std::vector<int> r_star_wires(lambda);
    for (int j = 0; j < lambda; ++j) r_star_wires[j] = cb.input(layout.r_star_offset + j);

    for (int j = 0; j < lambda; ++j) {
        std::vector<int> seed_wires(lambda);
        for (int b = 0; b < lambda; ++b)
            seed_wires[b] = cb.input(layout.seeds_offset + j * lambda + b);
        const auto expanded = prg_circuit(cb, seed_wires, block);
        for (size_t p = 0; p < block; ++p) {
            int predicted = expanded[p];
            if (xwi.receiver_for_prover.r[p])
                predicted = cb.f_xor(predicted, r_star_wires[j]);
            const int want = xwi.c_star.c[j * block + p];
            right_checks.push_back(want ? predicted : cb.f_not(predicted));
        }
    }

    std::vector<int> i_star_wires(idx_bits);
    for (int b = 0; b < idx_bits; ++b) i_star_wires[b] = cb.input(layout.i_star_offset + b);
    right_checks.push_back(less_than_const(cb, i_star_wires, lambda));

    // Payload wires: (i*, alpha_{i*,0} xor alpha_{i*,1}) with the value muxed
    // over the public alpha table.
    std::vector<int> payload(m);
    for (int b = 0; b < idx_bits; ++b) payload[b] = i_star_wires[b];
    std::vector<int> selectors(lambda);
    for (int i = 0; i < lambda; ++i)
        selectors[i] = cb.equals_const(i_star_wires, static_cast<uint64_t>(i));
    for (int v = 0; v < lambda; ++v) {
        std::vector<int> picks;
        for (int i = 0; i < lambda; ++i)
            if (xwi.alphas[i][0][v] ^ xwi.alphas[i][1][v]) picks.push_back(selectors[i]);
        payload[idx_bits + v] = cb.any_of(picks);
    }

    // c** blocks: seeds are derived from r* by the expansion circuit.
    const auto stream = prg_circuit(cb, r_star_wires, static_cast<size_t>(m) * lambda);
    for (int l = 0; l < m; ++l) {
        std::vector<int> seed_wires(stream.begin() + l * lambda, stream.begin() + (l + 1) * lambda);
        const auto expanded = prg_circuit(cb, seed_wires, block);
        for (size_t p = 0; p < block; ++p) {
            int predicted = expanded[p];
            if (xwi.receiver_for_prover.r[p]) predicted = cb.f_xor(predicted, payload[l]);
            const int want = xwi.c_star_star.c[l * block + p];
            right_checks.push_back(want ? predicted : cb.f_not(predicted));
        }
    }
    const int right_ok = cb.all_of(right_checks);

    return cb.finish(cb.f_or(left_ok, right_ok));
}

Bits left_assignment(const CompoundLayout& layout, const std::vector<int>& cycle) {
    Bits out(layout.total, 0);
    if (static_cast<int>(cycle.size()) != layout.vertex_fields)
        throw FormatError("cycle length mismatch");
    for (int i = 0; i < layout.vertex_fields; ++i)
        for (int b = 0; b < layout.bits_per_field; ++b)
            out[i * layout.bits_per_field + b] = (cycle[i] >> b) & 1;
    return out;
}

Bits trapdoor_assignment(const CompoundLayout& layout, const TrapdoorWitness& w) {
    Bits out(layout.total, 0);
    const int lambda = static_cast<int>(w.r_star.size());
    for (int j = 0; j < lambda; ++j) out[layout.r_star_offset + j] = w.r_star[j];
    if (static_cast<int>(w.r_seeds.size()) != lambda) throw FormatError("seed count mismatch");
    for (int j = 0; j < lambda; ++j)
        for (int b = 0; b < lambda; ++b) out[layout.seeds_offset + j * lambda + b] = w.r_seeds[j][b];
    const int idx_bits = layout.total - layout.i_star_offset;
    for (int b = 0; b < idx_bits; ++b) out[layout.i_star_offset + b] = (w.i_star >> b) & 1;
    return out;
}

Graph trapdoor_gadget(bool satisfied) {
    return satisfied ? Graph::cycle_graph(3) : Graph::bowtie();
}

std::vector<int> trapdoor_gadget_cycle() { return {0, 1, 2}; }

ReductionResult reduce_to_hamiltonicity(const BoolCircuit& c, const std::optional<Bits>& assignment) {
    bool satisfied_by_given = assignment && c.eval(*assignment);
    bool satisfiable = satisfied_by_given;
    if (!satisfiable) {
        if (c.inputs() > 22) throw ConfigError("circuit too wide for enumeration");
        for (uint64_t a = 0; a < (uint64_t{1} << c.inputs()); ++a) {
            if (c.eval(uint_to_bits(a, c.inputs()))) {
                satisfiable = true;
                break;
            }
        }
    }
    ReductionResult out{trapdoor_gadget(satisfiable), std::nullopt};
    if (satisfiable) out.cycle = trapdoor_gadget_cycle();
    return out;
}

// ---------------------------------------------------------------------------
// Blum repetitions.

namespace {

std::vector<int> random_permutation(int n, Rng& rng) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng() % (i + 1)]);
    return perm;
}

Bits permuted_matrix(const Graph& g, const std::vector<int>& perm) {
    const int n = g.vertices();
    Bits h(static_cast<size_t>(n) * n, 0);
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
            if (g.edge(u, v)) h[static_cast<size_t>(perm[u]) * n + perm[v]] = 1;
    return h;
}

Commitment commit_matrix(const Bits& entries, const ReceiverMsg& rmsg,
                         std::vector<Bits>* seeds, Rng& rng) {
    const size_t lambda = rmsg.r.size() / 3;
    seeds->resize(entries.size());
    for (auto& s : *seeds) s = random_bits(lambda, rng);
    return commit_string(rmsg, entries, *seeds);
}

bool check_block(const ReceiverMsg& rmsg, const Commitment& c, size_t pos, int bit,
                 const Bits& seed) {
    const size_t block = rmsg.r.size();
    if ((pos + 1) * block > c.c.size()) return false;
    Bits expect = prg_expand(seed, block);
    for (size_t j = 0; j < block; ++j) {
        uint8_t want = expect[j] ^ (bit ? rmsg.r[j] : 0);
        if (c.c[pos * block + j] != want) return false;
    }
    return true;
}

bool is_permutation(const std::vector<int>& perm, int n) {
    if (static_cast<int>(perm.size()) != n) return false;
    std::vector<bool> seen(n, false);
    for (int v : perm) {
        if (v < 0 || v >= n || seen[v]) return false;
        seen[v] = true;
    }
    return true;
}

}  // namespace

BlumCommitState blum_commit(const Graph& g, const std::optional<std::vector<int>>& cycle,
                            const ReceiverMsg& rmsg, Rng& rng, Commitment* out) {
    BlumCommitState st;
    st.perm = random_permutation(g.vertices(), rng);
    st.h_entries = permuted_matrix(g, st.perm);
    if (cycle) {
        if (!is_hamiltonian_cycle(g, *cycle)) throw ProtocolError("prover holds an invalid cycle");
        std::vector<int> pc(cycle->size());
        for (size_t i = 0; i < cycle->size(); ++i) pc[i] = st.perm[(*cycle)[i]];
        st.perm_cycle = std::move(pc);
    }
    *out = commit_matrix(st.h_entries, rmsg, &st.seeds, rng);
    return st;
}

BlumCommitState blum_simulate_commit(const Graph& g, int challenge, const ReceiverMsg& rmsg,
                                     Rng& rng, Commitment* out) {
    BlumCommitState st;
    st.simulated_challenge = challenge;
    const int n = g.vertices();
    if (challenge == 0) {
        st.perm = random_permutation(n, rng);
        st.h_entries = permuted_matrix(g, st.perm);
    } else {
        // Commit exactly a uniformly random directed n-cycle.
        std::vector<int> order = random_permutation(n, rng);
        st.h_entries.assign(static_cast<size_t>(n) * n, 0);
        for (int i = 0; i < n; ++i)
            st.h_entries[static_cast<size_t>(order[i]) * n + order[(i + 1) % n]] = 1;
        st.perm_cycle = std::move(order);
    }
    *out = commit_matrix(st.h_entries, rmsg, &st.seeds, rng);
    return st;
}

BlumResponse blum_respond(const BlumCommitState& st, int challenge) {
    if (st.simulated_challenge >= 0 && st.simulated_challenge != challenge)
        throw ProtocolError("simulated commitment cannot answer this challenge");
    BlumResponse resp;
    resp.challenge = challenge;
    if (challenge == 0) {
        resp.perm = st.perm;
        resp.opened_bits = st.h_entries;
        resp.opened_seeds = st.seeds;
        return resp;
    }
    if (!st.perm_cycle) throw ProtocolError("no cycle available for challenge 1");
    resp.cycle = *st.perm_cycle;
    const int n = static_cast<int>(resp.cycle.size());
    for (int i = 0; i < n; ++i) {
        const size_t pos = static_cast<size_t>(resp.cycle[i]) * n + resp.cycle[(i + 1) % n];
        resp.opened_bits.push_back(1);
        resp.opened_seeds.push_back(st.seeds[pos]);
    }
    return resp;
}

bool blum_check(const Graph& g, const ReceiverMsg& rmsg, const Commitment& c, int challenge,
                const BlumResponse& resp) {
    const int n = g.vertices();
    if (resp.challenge != challenge) return false;
    if (c.c.size() != rmsg.r.size() * static_cast<size_t>(n) * n) return false;
    if (challenge == 0) {
        if (!is_permutation(resp.perm, n)) return false;
        if (resp.opened_bits.size() != static_cast<size_t>(n) * n) return false;
        if (resp.opened_seeds.size() != resp.opened_bits.size()) return false;
        // Opened matrix must be exactly perm(g) and every block must verify.
        for (int u = 0; u < n; ++u)
            for (int v = 0; v < n; ++v) {
                const size_t pos = static_cast<size_t>(resp.perm[u]) * n + resp.perm[v];
                if (resp.opened_bits[pos] != (g.edge(u, v) ? 1 : 0)) return false;
            }
        for (size_t pos = 0; pos < resp.opened_bits.size(); ++pos)
            if (!check_block(rmsg, c, pos, resp.opened_bits[pos], resp.opened_seeds[pos]))
                return false;
        return true;
    }
    // Challenge 1: the opened positions form a Hamiltonian cycle of ones.
    if (!is_permutation(resp.cycle, n)) return false;
    if (resp.opened_bits.size() != static_cast<size_t>(n)) return false;
    if (resp.opened_seeds.size() != static_cast<size_t>(n)) return false;
    for (int i = 0; i < n; ++i) {
        if (resp.opened_bits[i] != 1) return false;
        const size_t pos = static_cast<size_t>(resp.cycle[i]) * n + resp.cycle[(i + 1) % n];
        if (!check_block(rmsg, c, pos, 1, resp.opened_seeds[i])) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Sessions.

WiTranscript run_wi_session(const Graph& g, const std::vector<int>& cycle, int t, Rng& rng) {
    if (t < 1) throw ConfigError("repetition count must be >= 1");
    const int lambda = 16;  // commitment security of the WI layer
    WiTranscript tr;
    tr.rmsg = sample_receiver_msg(lambda, rng);
    tr.t = t;
    std::vector<BlumCommitState> states(t);
    tr.commits.resize(t);
    for (int r = 0; r < t; ++r) states[r] = blum_commit(g, cycle, tr.rmsg, rng, &tr.commits[r]);
    tr.challenges = random_bits(t, rng);
    tr.accept = true;
    for (int r = 0; r < t; ++r) {
        tr.responses.push_back(blum_respond(states[r], tr.challenges[r]));
        tr.accept = tr.accept &&
                    blum_check(g, tr.rmsg, tr.commits[r], tr.challenges[r], tr.responses[r]);
    }
    return tr;
}

WiTranscript run_wi_cheat_session(const Graph& g, int t, Rng& rng) {
    if (t < 1) throw ConfigError("repetition count must be >= 1");
    const int lambda = 16;
    WiTranscript tr;
    tr.rmsg = sample_receiver_msg(lambda, rng);
    tr.t = t;
    std::vector<BlumCommitState> states(t);
    tr.commits.resize(t);
    // Guess the challenge per repetition and prepare only that branch.
    for (int r = 0; r < t; ++r)
        states[r] = blum_simulate_commit(g, static_cast<int>(rng() & 1), tr.rmsg, rng,
                                         &tr.commits[r]);
    tr.challenges = random_bits(t, rng);
    tr.accept = true;
    for (int r = 0; r < t; ++r) {
        // A wrong guess leaves only the prepared response to send.
        BlumResponse resp = blum_respond(states[r], states[r].simulated_challenge);
        tr.responses.push_back(resp);
        tr.accept = tr.accept &&
                    blum_check(g, tr.rmsg, tr.commits[r], tr.challenges[r], tr.responses[r]);
    }
    return tr;
}

bool verify_wi_transcript(const Graph& g, const WiTranscript& tr) {
    if (tr.t < 1 || static_cast<int>(tr.challenges.size()) != tr.t) return false;
    if (tr.commits.size() != static_cast<size_t>(tr.t)) return false;
    if (tr.responses.size() != static_cast<size_t>(tr.t)) return false;
    for (int r = 0; r < tr.t; ++r)
        if (!blum_check(g, tr.rmsg, tr.commits[r], tr.challenges[r], tr.responses[r]))
            return false;
    return true;
}

WiOrInstance wi_or_instance(const WiInstance& xwi) {
    WiOrInstance inst;
    inst.left = xwi.x;
    auto witness = decide_trapdoor(xwi);
    inst.right = trapdoor_gadget(witness.has_value());
    if (witness) inst.right_cycle = trapdoor_gadget_cycle();
    return inst;
}

WiOrProverState wi_or_commit(const WiOrInstance& inst, WiOrWitness which,
                             const std::optional<std::vector<int>>& left_cycle, int t,
                             const ReceiverMsg& rmsg, Rng& rng, WiOrCommitMsg* out) {
    if (t < 1) throw ConfigError("repetition count must be >= 1");
    WiOrProverState st;
    st.t = t;
    st.use_left = (which == WiOrWitness::Left);
    out->left.resize(t);
    out->right.resize(t);
    st.real.resize(t);
    st.fake.resize(t);
    st.fake_challenges = random_bits(t, rng);
    for (int r = 0; r < t; ++r) {
        switch (which) {
            case WiOrWitness::Left:
                st.real[r] = blum_commit(inst.left, left_cycle, rmsg, rng, &out->left[r]);
                st.fake[r] = blum_simulate_commit(inst.right, st.fake_challenges[r], rmsg, rng,
                                                  &out->right[r]);
                break;
            case WiOrWitness::Right:
                if (!inst.right_cycle) throw ProtocolError("right branch has no witness");
                st.real[r] = blum_commit(inst.right, inst.right_cycle, rmsg, rng, &out->right[r]);
                st.fake[r] = blum_simulate_commit(inst.left, st.fake_challenges[r], rmsg, rng,
                                                  &out->left[r]);
                break;
            case WiOrWitness::None:
                // Guess the session challenge; prepare both branches for it.
                st.real[r] = blum_simulate_commit(inst.left, static_cast<int>(rng() & 1), rmsg,
                                                  rng, &out->left[r]);
                st.fake[r] = blum_simulate_commit(
                    inst.right, st.real[r].simulated_challenge ^ st.fake_challenges[r], rmsg, rng,
                    &out->right[r]);
                st.use_left = true;
                break;
        }
    }
    return st;
}

std::vector<WiOrResponseRep> wi_or_respond(const WiOrProverState& st, const Bits& challenges) {
    if (static_cast<int>(challenges.size()) != st.t) throw ProtocolError("challenge length");
    std::vector<WiOrResponseRep> out(st.t);
    for (int r = 0; r < st.t; ++r) {
        const int e = challenges[r];
        WiOrResponseRep& rep = out[r];
        if (st.real[r].simulated_challenge >= 0 && st.fake[r].simulated_challenge >= 0) {
            // Witnessless: send what was prepared, valid only on a correct guess.
            rep.left_challenge = st.real[r].simulated_challenge;
            rep.left = blum_respond(st.real[r], st.real[r].simulated_challenge);
            rep.right = blum_respond(st.fake[r], st.fake[r].simulated_challenge);
        } else if (st.use_left) {
            const int fake_e = st.fake[r].simulated_challenge;
            rep.left_challenge = e ^ fake_e;
            rep.left = blum_respond(st.real[r], e ^ fake_e);
            rep.right = blum_respond(st.fake[r], fake_e);
        } else {
            const int fake_e = st.fake[r].simulated_challenge;
            rep.left_challenge = fake_e;
            rep.left = blum_respond(st.fake[r], fake_e);
            rep.right = blum_respond(st.real[r], e ^ fake_e);
        }
    }
    return out;
}

bool wi_or_check(const WiOrInstance& inst, const ReceiverMsg& rmsg, const WiOrCommitMsg& commits,
                 const Bits& challenges, const std::vector<WiOrResponseRep>& responses) {
    const int t = static_cast<int>(challenges.size());
    if (static_cast<int>(commits.left.size()) != t || static_cast<int>(commits.right.size()) != t)
        return false;
    if (static_cast<int>(responses.size()) != t) return false;
    for (int r = 0; r < t; ++r) {
        const int e_left = responses[r].left_challenge & 1;
        const int e_right = e_left ^ challenges[r];
        if (!blum_check(inst.left, rmsg, commits.left[r], e_left, responses[r].left)) return false;
        if (!blum_check(inst.right, rmsg, commits.right[r], e_right, responses[r].right))
            return false;
    }
    return true;
}

}  // namespace qzk
