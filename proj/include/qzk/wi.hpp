// The 4-round public-coin witness-indistinguishable layer: Blum's
// Hamiltonicity protocol over the bit commitments (receiver message, commit,
// challenge, response), lambda-fold parallel, plus the compound relation for
// the trapdoor phase.
//
// The compound relation is carried two ways. build_compound_circuit emits the
// full Boolean circuit (commitment checks unrolled through the PRG) and is the
// ground truth the tests evaluate. The interactive phase runs Blum on a pair
// of graphs: the instance graph itself for the witness branch, and a canonical
// gadget whose Hamiltonicity equals the trapdoor statement, decided through
// the commitment's message-recovery property. Challenge splitting across the
// pair keeps the used branch hidden.

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "qzk/common.hpp"
#include "qzk/crypto.hpp"

namespace qzk {

class Graph {
public:
    Graph() = default;
    Graph(int n, bool directed = false);

    int vertices() const { return n_; }
    bool directed() const { return directed_; }
    bool edge(int u, int v) const { return adj_[static_cast<size_t>(u) * n_ + v] != 0; }
    void add_edge(int u, int v);

    static Graph complete(int n);
    static Graph cycle_graph(int n);
    // Two triangles sharing a vertex; 5 vertices, not Hamiltonian.
    static Graph bowtie();

    bool operator==(const Graph& other) const {
        return n_ == other.n_ && directed_ == other.directed_ && adj_ == other.adj_;
    }

    std::vector<uint8_t> serialize() const;  // "GRA1" format
    static Graph deserialize(const std::vector<uint8_t>& bytes);

private:
    int n_ = 0;
    bool directed_ = false;
    std::vector<uint8_t> adj_;
};

// cycle lists every vertex exactly once, in visiting order.
bool is_hamiltonian_cycle(const Graph& g, const std::vector<int>& cycle);
std::optional<std::vector<int>> find_hamiltonian_cycle(const Graph& g);  // brute force, n <= 12

// ---------------------------------------------------------------------------
// Boolean circuits.

enum class CircuitOp { And, Xor, Not, Const };

struct CircuitGate {
    CircuitOp op;
    int a = 0;  // wire, or constant value for Const
    int b = 0;  // second wire for And/Xor
};

class BoolCircuit {
public:
    BoolCircuit() = default;
    BoolCircuit(int n_inputs, std::vector<CircuitGate> gates, int output);

    int inputs() const { return n_inputs_; }
    const std::vector<CircuitGate>& gates() const { return gates_; }
    int output() const { return output_; }

    bool eval(const Bits& assignment) const;

private:
    int n_inputs_ = 0;
    std::vector<CircuitGate> gates_;
    int output_ = 0;
};

class CircuitBuilder {
public:
    explicit CircuitBuilder(int n_inputs) : n_inputs_(n_inputs) {}

    int input(int i) const;
    int constant(int v);
    int f_not(int a);
    int f_and(int a, int b);
    int f_xor(int a, int b);
    int f_or(int a, int b);
    int f_eq(int a, int b);
    int all_of(const std::vector<int>& wires);
    int any_of(const std::vector<int>& wires);
    // wires equal to the little-endian bits of value, as a comparison result.
    int equals_const(const std::vector<int>& wires, uint64_t value);

    BoolCircuit finish(int output) const;
    int gate_count() const { return static_cast<int>(gates_.size()); }

private:
    int emit(CircuitOp op, int a, int b);
    int n_inputs_;
    std::vector<CircuitGate> gates_;
};

// Mirrors crypto's prg_expand bit-for-bit as circuit wires over seed wires.
std::vector<int> prg_circuit(CircuitBuilder& cb, const std::vector<int>& seed_wires,
                             size_t out_len);

// ---------------------------------------------------------------------------
// The compound relation.

struct WiInstance {
    Graph x;
    Commitment c_star;                        // prover's commitment to r*
    Commitment c_star_star;                   // prover's commitment to the trapdoor payload
    std::vector<std::array<Bits, 2>> alphas;  // lambda x 2 opened verifier values
    ReceiverMsg receiver_for_prover;          // receiver message under both c* and c**
    int lambda = 0;
};

struct TrapdoorWitness {
    Bits r_star;
    std::vector<Bits> r_seeds;  // per-bit seeds of c*
    int i_star = 0;
};

// Width of the c** payload: index bits plus a lambda-bit value.
int trapdoor_payload_bits(int lambda);
Bits encode_trapdoor_payload(int lambda, int i_star, const Bits& value);

// Message-recovery-based decision of the trapdoor branch (exact at toy
// lambda); also recovers the witness when the statement holds.
std::optional<TrapdoorWitness> decide_trapdoor(const WiInstance& xwi);

struct CompoundLayout {
    int vertex_fields = 0;    // cycle encoding: one field per vertex
    int bits_per_field = 0;
    int r_star_offset = 0;
    int seeds_offset = 0;     // lambda seeds of lambda bits
    int i_star_offset = 0;
    int total = 0;
};

BoolCircuit build_compound_circuit(const WiInstance& xwi, CompoundLayout* layout = nullptr);
Bits left_assignment(const CompoundLayout& layout, const std::vector<int>& cycle);
Bits trapdoor_assignment(const CompoundLayout& layout, const TrapdoorWitness& w);

struct ReductionResult {
    Graph graph;
    std::optional<std::vector<int>> cycle;
};

// Deterministic gadget reduction: the output graph is Hamiltonian exactly when
// the circuit is satisfiable (decided by enumeration over the inputs), and a
// satisfying assignment maps to a valid cycle witness.
ReductionResult reduce_to_hamiltonicity(const BoolCircuit& c,
                                        const std::optional<Bits>& assignment);

// Gadget graphs backing the trapdoor branch of the interactive phase.
Graph trapdoor_gadget(bool satisfied);
std::vector<int> trapdoor_gadget_cycle();

// ---------------------------------------------------------------------------
// Blum repetitions.

struct BlumCommitState {
    std::vector<int> perm;                       // committed relabeling
    Bits h_entries;                              // bits of the committed matrix
    std::vector<Bits> seeds;
    std::optional<std::vector<int>> perm_cycle;  // cycle in committed coordinates
    int simulated_challenge = -1;                // >= 0 when prepared for one challenge only
};

struct BlumResponse {
    int challenge = 0;
    std::vector<int> perm;    // challenge 0
    std::vector<int> cycle;   // challenge 1, vertex order in committed coordinates
    Bits opened_bits;
    std::vector<Bits> opened_seeds;
};

BlumCommitState blum_commit(const Graph& g, const std::optional<std::vector<int>>& cycle,
                            const ReceiverMsg& rmsg, Rng& rng, Commitment* out);
// Commitment that can answer exactly one pre-chosen challenge; needs no witness.
BlumCommitState blum_simulate_commit(const Graph& g, int challenge, const ReceiverMsg& rmsg,
                                     Rng& rng, Commitment* out);
BlumResponse blum_respond(const BlumCommitState& st, int challenge);
bool blum_check(const Graph& g, const ReceiverMsg& rmsg, const Commitment& c, int challenge,
                const BlumResponse& resp);

// ---------------------------------------------------------------------------
// Parallel sessions.

struct WiTranscript {
    ReceiverMsg rmsg;
    int t = 0;
    Bits challenges;
    std::vector<Commitment> commits;       // per repetition
    std::vector<BlumResponse> responses;   // per repetition
    bool accept = false;
};

// Single-graph interactive proof, t parallel repetitions, honest prover.
WiTranscript run_wi_session(const Graph& g, const std::vector<int>& cycle, int t, Rng& rng);
// Witnessless prover that pre-guesses each challenge bit.
WiTranscript run_wi_cheat_session(const Graph& g, int t, Rng& rng);
// Re-verification of a stored transcript (public-coin replay).
bool verify_wi_transcript(const Graph& g, const WiTranscript& tr);

struct WiOrInstance {
    Graph left;
    Graph right;
    std::optional<std::vector<int>> right_cycle;
};

// Builds the two-branch instance for the trapdoor phase from the public data.
WiOrInstance wi_or_instance(const WiInstance& xwi);

struct WiOrCommitMsg {
    std::vector<Commitment> left;   // per repetition
    std::vector<Commitment> right;
};

struct WiOrResponseRep {
    int left_challenge = 0;  // right challenge = left_challenge xor session challenge
    BlumResponse left;
    BlumResponse right;
};

struct WiOrProverState {
    int t = 0;
    bool use_left = true;
    std::vector<BlumCommitState> real;
    std::vector<BlumCommitState> fake;
    Bits fake_challenges;
};

enum class WiOrWitness { Left, Right, None };

WiOrProverState wi_or_commit(const WiOrInstance& inst, WiOrWitness which,
                             const std::optional<std::vector<int>>& left_cycle, int t,
                             const ReceiverMsg& rmsg, Rng& rng, WiOrCommitMsg* out);
std::vector<WiOrResponseRep> wi_or_respond(const WiOrProverState& st, const Bits& challenges);
bool wi_or_check(const WiOrInstance& inst, const ReceiverMsg& rmsg, const WiOrCommitMsg& commits,
                 const Bits& challenges, const std::vector<WiOrResponseRep>& responses);

}  // namespace qzk
