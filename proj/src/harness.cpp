#include "qzk/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

#include "qzk/adversary.hpp"
#include "qzk/protocol.hpp"
#include "qzk/simulator.hpp"
#include "qzk/stats.hpp"
#include "qzk/subspace.hpp"
#include "qzk/wi.hpp"

namespace qzk {

bool Report::pass() const {
    for (const auto& m : metrics)
        if (!m.pass) return false;
    return true;
}

std::string Report::to_json(bool include_wall) const {
    nlohmann::json j;
    j["experiment"] = config.name;
    j["config"] = {{"lambda", config.lambda},   {"width", config.width},
                   {"trials", config.trials},   {"wi_reps", config.wi_reps},
                   {"seed", config.seed}};
    j["pass"] = pass();
    if (include_wall) j["wall_seconds"] = wall_seconds;
    j["metrics"] = nlohmann::json::array();
    for (const auto& m : metrics)
        j["metrics"].push_back({{"name", m.name},
                                {"value", m.value},
                                {"threshold", m.threshold},
                                {"comparison", m.comparison},
                                {"pass", m.pass},
                                {"anchor", m.anchor}});
    j["histograms"] = nlohmann::json::object();
    for (const auto& [name, bins] : histograms) j["histograms"][name] = bins;
    return j.dump(2);
}

std::string Report::to_text() const {
    std::ostringstream os;
    os << "experiment: " << config.name << "  (lambda=" << config.lambda
       << " width=" << config.width << " trials=" << config.trials << " seed=" << config.seed
       << ")\n";
    size_t name_w = 4;
    for (const auto& m : metrics) name_w = std::max(name_w, m.name.size());
    for (const auto& m : metrics) {
        os << (m.pass ? "  PASS  " : "  FAIL  ");
        os << m.name << std::string(name_w - m.name.size() + 2, ' ');
        os << m.value << " " << m.comparison << " " << m.threshold << "    [" << m.anchor << "]\n";
    }
    os << (pass() ? "RESULT: PASS" : "RESULT: FAIL") << "  (" << wall_seconds << " s)\n";
    return os.str();
}

std::string Report::to_csv() const {
    std::ostringstream os;
    os << "histogram,bin,count\n";
    for (const auto& [name, bins] : histograms)
        for (size_t i = 0; i < bins.size(); ++i)
            os << name << "," << i << "," << bins[i] << "\n";
    return os.str();
}

namespace {

Metric bounded_above(const std::string& name, double value, double threshold,
                     const std::string& anchor) {
    return Metric{name, value, threshold, "<=", value <= threshold, anchor};
}

Metric bounded_below(const std::string& name, double value, double threshold,
                     const std::string& anchor) {
    return Metric{name, value, threshold, ">=", value >= threshold, anchor};
}

Metric exact_zero(const std::string& name, double value, const std::string& anchor) {
    return Metric{name, value, 0, "==", value == 0, anchor};
}

ProtocolParams params_of(const ExperimentConfig& cfg) {
    ProtocolParams p;
    p.lambda = cfg.lambda;
    p.wi_reps = cfg.wi_reps;
    return p;
}

// ---------------------------------------------------------------------------
// Individual experiments.

Report exp_completeness(const ExperimentConfig& cfg) {
    Report report;
    long accepts = 0;
    for (long t = 0; t < cfg.trials; ++t) {
        Rng rng = derived_rng(cfg.seed, t);
        ProverSession prover(Graph::complete(4), std::vector<int>{0, 1, 2, 3}, params_of(cfg), t,
                             Rng(rng()));
        VerifierSession verifier(Graph::complete(4), params_of(cfg), t, Rng(rng()));
        Transcript tr = run_session(std::move(prover), std::move(verifier));
        if (tr.verdict.kind == VerdictKind::Accept) ++accepts;
    }
    report.metrics.push_back(bounded_below(
        "accept_rate", static_cast<double>(accepts) / cfg.trials, 1.0,
        "honest sessions accept with probability 1"));
    return report;
}

Report exp_soundness_guessing(const ExperimentConfig& cfg) {
    Report report;
    long wins = 0;
    for (long t = 0; t < cfg.trials; ++t) {
        Rng rng = derived_rng(cfg.seed, t);
        if (run_guessing_prover(Graph::bowtie(), params_of(cfg), rng).kind == VerdictKind::Accept)
            ++wins;
    }
    const double rate = static_cast<double>(wins) / cfg.trials;
    const double ceiling = cfg.lambda * std::pow(2.0, -cfg.lambda);
    report.metrics.push_back(bounded_above(
        "guessing_accept_rate", rate, ceiling + three_sigma(ceiling, cfg.trials),
        "trapdoor values are information-theoretically hidden: lambda/2^lambda ceiling"));
    return report;
}

Report exp_soundness_mauling(const ExperimentConfig& cfg) {
    Report report;
    long wins = 0;
    for (long t = 0; t < cfg.trials; ++t) {
        Rng rng = derived_rng(cfg.seed, t);
        if (run_mauling_prover(Graph::bowtie(), params_of(cfg), rng).kind == VerdictKind::Accept)
            ++wins;
    }
    const double rate = static_cast<double>(wins) / cfg.trials;
    const double bound = std::pow(2.0, -cfg.wi_reps);
    report.metrics.push_back(bounded_above(
        "mauling_accept_rate", rate, bound + three_sigma(std::max(bound, 1e-9), cfg.trials),
        "copied commitments do not open under the committed r*; only the 2^-t cheat remains"));
    return report;
}

// Random verifier effect in the quantum-coin family.
WrappedVerifierSpec random_coin_spec(int m, Rng& rng) {
    WrappedVerifierSpec spec;
    spec.name = "random_coin";
    spec.width = m;
    UnitaryDescriptor pre(m);
    for (int g = 0; g < 5; ++g) {
        switch (rng() % 4) {
            case 0: pre.append(Gate::h(rng() % m)); break;
            case 1: pre.append(Gate::t(rng() % m)); break;
            case 2: {
                std::uniform_real_distribution<double> ang(0.0, M_PI);
                const double th = ang(rng);
                pre.append(Gate::dense_gate({static_cast<int>(rng() % m)},
                                            Matrix{std::cos(th), -std::sin(th), std::sin(th),
                                                   std::cos(th)}));
                break;
            }
            default:
                if (m > 1) {
                    int a = static_cast<int>(rng() % m);
                    pre.append(Gate::cnot(a, (a + 1) % m));
                } else {
                    pre.append(Gate::h(0));
                }
        }
    }
    QuantumAbortRule rule;
    rule.pre = pre;
    rule.measured = 1 + static_cast<int>(rng() % m);
    const uint64_t outcomes = uint64_t{1} << rule.measured;
    for (uint64_t o = 0; o < outcomes; ++o)
        if (rng() & 1) rule.abort_outcomes.push_back(o);
    if (rule.abort_outcomes.size() == outcomes) rule.abort_outcomes.pop_back();
    spec.coin = rule;
    return spec;
}

Report exp_mixed_state_bound(const ExperimentConfig& cfg) {
    Report report;
    long violations = 0;
    double worst_margin = 1e9;
    for (long t = 0; t < cfg.trials; ++t) {
        Rng rng = derived_rng(cfg.seed, t);
        const int m = 1 + static_cast<int>(rng() % cfg.width);
        WrappedVerifierSpec spec = random_coin_spec(m, rng);
        spec.advice = random_density(m, rng);
        BoundReport b = bound_check(spec, params_of(cfg), std::nullopt, rng);
        worst_margin = std::min(worst_margin, b.p_prime - b.bound);
        if (!b.ok) ++violations;
    }
    report.metrics.push_back(exact_zero(
        "bound_violations", static_cast<double>(violations),
        "maximally-mixed lower bound p' >= (p/2^M)(1 - 2^-lambda), exact density check"));
    report.metrics.push_back(bounded_below("worst_margin", worst_margin, -1e-9,
                                           "violation floor within 1e-9"));
    return report;
}

Report exp_sim_iterations(const ExperimentConfig& cfg) {
    Report report;
    const int m = cfg.width;
    const double theta = std::acos(std::sqrt(0.7));
    WrappedVerifierSpec spec;
    spec.name = "quantum_coin";
    spec.width = m;
    UnitaryDescriptor rot(m);
    rot.append(Gate::dense_gate({0}, Matrix{std::cos(theta), -std::sin(theta), std::sin(theta),
                                            std::cos(theta)}));
    QuantumAbortRule rule;
    rule.pre = rot;
    rule.measured = 1;
    rule.abort_outcomes = {1};
    spec.coin = rule;

    Rng bound_rng = derived_rng(cfg.seed, 0xb0);
    BoundReport bounds = bound_check(spec, params_of(cfg), std::nullopt, bound_rng);

    double total_iters = 0;
    long completed = 0;
    long space_violations = 0;
    std::vector<long> histogram(40, 0);
    for (long t = 0; t < cfg.trials; ++t) {
        Rng rng = derived_rng(cfg.seed, t);
        auto oracle = make_oracle(spec, Graph::complete(4), params_of(cfg), rng());
        SimResult res = simulate(Graph::complete(4), *oracle, params_of(cfg), rng);
        if (res.peak_qubits > 2 * m) ++space_violations;
        if (res.status == SimStatus::Completed) {
            total_iters += static_cast<double>(res.iterations);
            ++completed;
            const size_t bin = std::min<size_t>(res.iterations, histogram.size() - 1);
            ++histogram[bin];
        }
    }
    report.histograms["iterations"] = histogram;
    const double mean = completed ? total_iters / completed : 0.0;
    report.metrics.push_back(bounded_above("mean_iterations", mean,
                                           std::pow(2.0, m + 1),
                                           "expected lookaheads below 2^{M+1}"));
    // sigma of the per-run iteration count is at most its geometric bound.
    const double analytic = (1 - bounds.p) + (bounds.p_prime > 0 ? bounds.p / bounds.p_prime : 0);
    const double sigma = bounds.p_prime > 0
                             ? std::sqrt(1.0 - bounds.p_prime) / bounds.p_prime /
                                   std::sqrt(static_cast<double>(std::max(completed, 1L)))
                             : 0.0;
    report.metrics.push_back(bounded_above("mean_iterations_vs_analytic", mean,
                                           analytic + 3 * sigma,
                                           "expected lookaheads below (1-p) + p/p'"));
    report.metrics.push_back(exact_zero("space_violations", static_cast<double>(space_violations),
                                        "peak qubits within 2M on every run"));
    return report;
}

Report exp_sim_tail(const ExperimentConfig& cfg) {
    Report report;
    const double theta = M_PI / 4;  // p' ~ 1/2
    WrappedVerifierSpec spec;
    spec.name = "fair_coin";
    spec.width = 1;
    UnitaryDescriptor rot(1);
    rot.append(Gate::dense_gate({0}, Matrix{std::cos(theta), -std::sin(theta), std::sin(theta),
                                            std::cos(theta)}));
    QuantumAbortRule rule;
    rule.pre = rot;
    rule.measured = 1;
    rule.abort_outcomes = {1};
    spec.coin = rule;
    Rng rng = derived_rng(cfg.seed, 1);
    TailReport tail = termination_tail(spec, Graph::complete(4), params_of(cfg), cfg.trials, rng);
    report.metrics.push_back(bounded_above(
        "tail_rate", tail.tail_rate,
        tail.bound + three_sigma(tail.bound, std::max(tail.runs, 1L)),
        "loop exceeds lambda/p' iterations with probability at most e^-lambda"));
    return report;
}

Report exp_space_bound(const ExperimentConfig& cfg) {
    Report report;
    long runs = 0, violations = 0;
    for (const auto& zv : build_zoo(cfg.width)) {
        for (long t = 0; t < cfg.trials; ++t) {
            Rng rng = derived_rng(cfg.seed, runs);
            auto oracle = make_oracle(zv.spec, Graph::complete(4), params_of(cfg), rng());
            SimResult res = simulate(Graph::complete(4), *oracle, params_of(cfg), rng, 100000);
            ++runs;
            if (res.peak_qubits > 2 * zv.spec.width) ++violations;
        }
    }
    report.metrics.push_back(exact_zero("space_violations", static_cast<double>(violations),
                                        "simulator peak qubit usage within f(s) = 2s"));
    report.metrics.push_back(bounded_below("runs_checked", static_cast<double>(runs), 1,
                                           "assertion coverage"));
    return report;
}

Report exp_binding_exhaustive(const ExperimentConfig& cfg) {
    Report report;
    const int lambda = 4;
    std::vector<Bits> expansions;
    for (uint32_t s = 0; s < (1u << lambda); ++s)
        expansions.push_back(prg_expand(uint_to_bits(s, lambda), 3 * lambda));
    std::set<uint64_t> bad;
    for (const auto& e1 : expansions)
        for (const auto& e2 : expansions) bad.insert(bits_to_uint(xor_bits(e1, e2)));
    const double fraction = static_cast<double>(bad.size()) / std::pow(2.0, 3 * lambda);
    report.metrics.push_back(bounded_above(
        "equivocable_receiver_fraction", fraction, std::pow(2.0, -lambda),
        "statistical binding: bad receiver messages limited to 2^{2l}/2^{3l}"));
    (void)cfg;
    return report;
}

Report exp_subspace_machinery(const ExperimentConfig& cfg) {
    Report report;
    Rng rng = derived_rng(cfg.seed, 0);
    // Oracle test on |A>.
    double min_fidelity = 1.0;
    long test_failures = 0;
    for (int t = 0; t < 200; ++t) {
        const int n = 4 + 2 * static_cast<int>(rng() % 3);
        Subspace a = sample_subspace(n, n / 2, rng);
        SubspaceOracleHandle h(a);
        auto res = test_state(h, prepare_state(a), rng);
        if (!res.pass) ++test_failures;
        min_fidelity = std::min(min_fidelity, res.post.fidelity_with(prepare_state(a)));
    }
    report.metrics.push_back(exact_zero("oracle_test_failures", static_cast<double>(test_failures),
                                        "the oracle test passes on |A> with probability 1"));
    report.metrics.push_back(bounded_below("oracle_post_fidelity", min_fidelity, 1.0 - 1e-12,
                                           "post state on pass is exactly |A>"));

    // Route agreement on orthonormal-basis subspaces, n <= 8.
    double worst_prob_gap = 0, worst_fid = 1.0;
    int agreements = 0;
    long route_case = 0;
    while (agreements < 100) {
        Rng local = derived_rng(cfg.seed, 1000 + route_case++);
        const int n = 4 + 2 * static_cast<int>(local() % 3);
        Subspace a = sample_subspace(n, 1 + static_cast<int>(local() % (n / 2)), local);
        if (!orthonormal_basis(a)) continue;
        QState probe = random_pure(n, local);
        Rng ra = derived_rng(cfg.seed, 5000 + agreements);
        Rng rb = derived_rng(cfg.seed, 5000 + agreements);
        auto direct = project_A_direct(a, probe, ra);
        auto circuit = project_A_circuit(a, probe, rb);
        if (direct.outcome != circuit.outcome) worst_prob_gap = 1.0;
        const double fid = circuit.post.is_pure() ? direct.post.fidelity_with(circuit.post)
                                                  : circuit.post.fidelity_with(direct.post);
        worst_fid = std::min(worst_fid, fid);
        ++agreements;
    }
    report.metrics.push_back(bounded_above("route_outcome_gap", worst_prob_gap, 1e-9,
                                           "ancilla route and direct projector agree"));
    report.metrics.push_back(bounded_below("route_post_fidelity", worst_fid, 1.0 - 1e-9,
                                           "post states agree across routes"));

    // C_A correctness on 50 random valid bases.
    double worst_ca = 1.0;
    int done = 0;
    long ca_case = 0;
    while (done < 50) {
        Rng local = derived_rng(cfg.seed, 9000 + ca_case++);
        const int n = 4 + 2 * static_cast<int>(local() % 3);
        const int k = 1 + static_cast<int>(local() % (n / 2));
        Subspace a = sample_subspace(n, k, local);
        auto onb = orthonormal_basis(a);
        if (!onb) continue;
        UnitaryDescriptor ca = build_CA_from_basis(n, *onb);
        QState out = apply_unitary(QState::zero(k + n), ca);
        worst_ca = std::min(worst_ca, out.fidelity_with(QState::zero(k).tensor(prepare_state(a))));
        ++done;
    }
    report.metrics.push_back(bounded_below("ca_fidelity", worst_ca, 1.0 - 1e-12,
                                           "C_A maps |0^k>|0^n> to |0^k>|A> exactly"));
    return report;
}

Report exp_clone_floor(const ExperimentConfig& cfg) {
    Report report;
    for (int n : {4, 6}) {
        Rng rng = derived_rng(cfg.seed, n);
        auto mr = clone_experiment("measure_and_resend", n, cfg.trials, rng);
        const double expect = std::pow(2.0, -n);
        const double tol = three_sigma(expect, cfg.trials);
        report.metrics.push_back(Metric{
            "measure_resend_n" + std::to_string(n), mr.success_rate, expect,
            "within 3 sigma of", std::abs(mr.success_rate - expect) <= tol,
            "measure-and-resend lands on the 2^-n overlap floor"});
    }
    {
        Rng rng = derived_rng(cfg.seed, 99);
        auto pad = clone_experiment("identity_pad", cfg.width, cfg.trials, rng);
        const double expect = std::pow(2.0, -cfg.width / 2.0);
        const double tol = three_sigma(expect, cfg.trials);
        report.metrics.push_back(Metric{
            "identity_pad_n" + std::to_string(cfg.width), pad.success_rate, expect,
            "within 3 sigma of", std::abs(pad.success_rate - expect) <= tol,
            "a zero-query second copy is capped by the 2^{-n/2} overlap"});
    }
    return report;
}

Report exp_impossibility_events(const ExperimentConfig& cfg) {
    Report report;
    const int n = cfg.width;
    long events = 0, straight_failures = 0;
    for (long t = 0; t < cfg.trials; ++t) {
        Rng rng = derived_rng(cfg.seed, t);
        auto probe = run_probe_policy(ProbePolicy::StraightLine, Graph::complete(4),
                                      std::vector<int>{0, 1, 2, 3}, params_of(cfg), n, rng);
        events += probe.events.total();
        if (!probe.success) ++straight_failures;
    }
    report.metrics.push_back(exact_zero("straightline_events", static_cast<double>(events),
                                        "in-order driving produces no structure-lemma events"));
    report.metrics.push_back(exact_zero("straightline_failures",
                                        static_cast<double>(straight_failures),
                                        "in-order driving always reaches the accept"));

    for (auto [policy, name] : {std::pair{ProbePolicy::OutOfOrder, "out_of_order"},
                                std::pair{ProbePolicy::RepeatQuery, "repeat_query"}}) {
        long attempts = 0, successes = 0;
        for (long t = 0; t < cfg.trials; ++t) {
            Rng rng = derived_rng(cfg.seed, 100000 + t);
            auto probe = run_probe_policy(policy, Graph::complete(4),
                                          std::vector<int>{0, 1, 2, 3}, params_of(cfg), n, rng);
            attempts += probe.probe_attempts;
            successes += probe.probe_state_successes;
        }
        const double rate = attempts ? static_cast<double>(successes) / attempts : 0.0;
        const double floor = std::pow(2.0, -n / 2.0);
        report.metrics.push_back(bounded_above(
            std::string(name) + "_state_success_rate", rate, floor + three_sigma(floor, attempts),
            "probe passes the subspace check at the 2^{-n/2} overlap floor"));
    }

    Rng rng = derived_rng(cfg.seed, 777);
    const long forged = count_forged_tag_events(Graph::complete(4), params_of(cfg), n, 100000, rng);
    report.metrics.push_back(exact_zero("forged_tag_d_events", static_cast<double>(forged),
                                        "no register-Z mismatch survives the tag check"));
    return report;
}

Report exp_extraction_gap(const ExperimentConfig& cfg) {
    Report report;
    long yes = 0, no = 0;
    for (long t = 0; t < cfg.trials; ++t) {
        Rng rng = derived_rng(cfg.seed, t);
        if (run_extracted_prover(Graph::complete(4), std::vector<int>{0, 1, 2, 3}, params_of(cfg),
                                 cfg.width, false, rng)
                .verdict.kind == VerdictKind::Accept)
            ++yes;
        if (run_extracted_prover(Graph::bowtie(), std::nullopt, params_of(cfg), cfg.width, false,
                                 rng)
                .verdict.kind == VerdictKind::Accept)
            ++no;
    }
    const double yes_rate = static_cast<double>(yes) / cfg.trials;
    const double no_rate = static_cast<double>(no) / cfg.trials;
    report.metrics.push_back(bounded_below("yes_accept_rate", yes_rate, 0.95,
                                           "the extracted prover convinces on yes-instances"));
    report.metrics.push_back(bounded_above("no_accept_rate", no_rate, 0.05,
                                           "soundness holds against the extracted prover"));
    report.metrics.push_back(bounded_below("decision_gap", yes_rate - no_rate, 0.9,
                                           "the gap that places the language in reach of the "
                                           "interaction"));
    return report;
}

std::string observable_key(int abort_step, VerdictKind kind, const Bits& challenges) {
    int watched = challenges.empty() ? -1 : challenges[0];
    int weight_bucket = -1;
    if (!challenges.empty()) {
        int pop = 0;
        for (uint8_t b : challenges) pop += b;
        weight_bucket = pop * 4 / static_cast<int>(challenges.size());  // 0..4
    }
    return std::to_string(abort_step) + "|" + std::to_string(static_cast<int>(kind)) + "|" +
           std::to_string(watched) + "|" + std::to_string(weight_bucket);
}

Report exp_view_chi2(const ExperimentConfig& cfg) {
    Report report;
    for (const auto& zv : build_zoo(std::min(cfg.width, 3))) {
        Histogram real_hist, sim_hist;
        long space_violations = 0;
        for (long t = 0; t < cfg.trials; ++t) {
            Rng rng = derived_rng(cfg.seed, t * 13 + 1);
            auto oracle = make_oracle(zv.spec, Graph::complete(4), params_of(cfg), rng());
            RealResult real = run_real_session(Graph::complete(4), *oracle,
                                               std::vector<int>{0, 1, 2, 3}, params_of(cfg), rng);
            real_hist.add(observable_key(real.abort_step, real.verdict.kind, real.challenges));
        }
        for (long t = 0; t < cfg.trials; ++t) {
            Rng rng = derived_rng(cfg.seed, t * 13 + 7);
            auto oracle = make_oracle(zv.spec, Graph::complete(4), params_of(cfg), rng());
            SimResult sim = simulate(Graph::complete(4), *oracle, params_of(cfg), rng, 100000);
            if (sim.peak_qubits > 2 * zv.spec.width) ++space_violations;
            sim_hist.add(observable_key(sim.abort_step, sim.verdict.kind, sim.challenges));
        }
        auto [a, b] = Histogram::aligned(real_hist, sim_hist);
        const double p = chi2_two_sample_pvalue(a, b);
        report.metrics.push_back(bounded_below(
            "view_chi2_p_" + zv.spec.name, p, 1e-3,
            "real and simulated observable fields are statistically indistinguishable"));
        report.metrics.push_back(exact_zero("space_violations_" + zv.spec.name,
                                            static_cast<double>(space_violations),
                                            "peak qubit usage within 2M during the comparison"));
    }
    return report;
}

using Runner = Report (*)(const ExperimentConfig&);

const std::vector<std::pair<std::string, Runner>>& experiment_table() {
    static const std::vector<std::pair<std::string, Runner>> table = {
        {"completeness", exp_completeness},
        {"soundness-guessing", exp_soundness_guessing},
        {"soundness-mauling", exp_soundness_mauling},
        {"mixed-state-bound", exp_mixed_state_bound},
        {"sim-iterations", exp_sim_iterations},
        {"sim-tail", exp_sim_tail},
        {"space-bound", exp_space_bound},
        {"binding-exhaustive", exp_binding_exhaustive},
        {"subspace-machinery", exp_subspace_machinery},
        {"clone-floor", exp_clone_floor},
        {"impossibility-events", exp_impossibility_events},
        {"extraction-gap", exp_extraction_gap},
        {"view-chi2", exp_view_chi2},
    };
    return table;
}

}  // namespace

std::vector<std::string> experiment_names() {
    std::vector<std::string> names;
    for (const auto& [name, fn] : experiment_table()) names.push_back(name);
    return names;
}

Report run_experiment(const ExperimentConfig& cfg) {
    const auto& table = experiment_table();
    auto it = std::find_if(table.begin(), table.end(),
                           [&](const auto& e) { return e.first == cfg.name; });
    if (it == table.end()) throw ConfigError("unknown experiment: " + cfg.name);
    const auto start = std::chrono::steady_clock::now();
    Report report = it->second(cfg);
    report.config = cfg;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

int acceptance_criterion_count() { return 11; }

CriterionResult run_acceptance_criterion(int index, uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    auto finish = [&](const std::string& title, const Report& report) {
        CriterionResult r;
        r.index = index;
        r.title = title;
        r.pass = report.pass();
        std::ostringstream detail;
        for (const auto& m : report.metrics)
            detail << m.name << "=" << m.value << (m.pass ? " ok; " : " FAIL; ");
        r.detail = detail.str();
        r.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return r;
    };

    switch (index) {
        case 1: {
            ExperimentConfig c{"mixed-state-bound", 16, 3, 200, 40, seed, ""};
            return finish("maximally-mixed bound, exact density check", run_experiment(c));
        }
        case 2: {
            ExperimentConfig c{"sim-iterations", 8, 3, 1000, 40, seed, ""};
            Report a = run_experiment(c);
            ExperimentConfig ct{"sim-tail", 8, 1, 1000, 40, seed, ""};
            Report b = run_experiment(ct);
            a.metrics.insert(a.metrics.end(), b.metrics.begin(), b.metrics.end());
            return finish("simulator iteration bound and termination tail", a);
        }
        case 3: {
            ExperimentConfig c{"space-bound", 8, 3, 30, 40, seed, ""};
            return finish("space contract: peak qubits within 2M on every run",
                          run_experiment(c));
        }
        case 4: {
            ExperimentConfig c{"completeness", 8, 0, 200, 40, seed, ""};
            return finish("completeness at lambda=8, t=40", run_experiment(c));
        }
        case 5: {
            ExperimentConfig c{"soundness-guessing", 8, 0, 10000, 40, seed, ""};
            Report a = run_experiment(c);
            ExperimentConfig cm{"soundness-mauling", 8, 0, 1000, 40, seed, ""};
            Report b = run_experiment(cm);
            a.metrics.insert(a.metrics.end(), b.metrics.begin(), b.metrics.end());
            return finish("soundness ceiling for the guessing and mauling provers", a);
        }
        case 6: {
            ExperimentConfig c{"binding-exhaustive", 4, 0, 1, 40, seed, ""};
            return finish("exhaustive statistical binding at lambda=4", run_experiment(c));
        }
        case 7: {
            ExperimentConfig c{"subspace-machinery", 8, 8, 100, 40, seed, ""};
            return finish("subspace machinery: oracle test, projector routes, C_A",
                          run_experiment(c));
        }
        case 8: {
            ExperimentConfig c{"clone-floor", 8, 6, 10000, 40, seed, ""};
            return finish("cloning floor for zero- and low-query strategies", run_experiment(c));
        }
        case 9: {
            ExperimentConfig c{"impossibility-events", 8, 8, 1000, 40, seed, ""};
            return finish("impossibility structure: events and probe floors", run_experiment(c));
        }
        case 10: {
            ExperimentConfig c{"extraction-gap", 8, 6, 500, 40, seed, ""};
            return finish("extracted prover decision gap", run_experiment(c));
        }
        case 11: {
            ExperimentConfig c{"view-chi2", 16, 3, 2000, 40, seed, ""};
            return finish("real vs simulated view, observable-field chi-square",
                          run_experiment(c));
        }
        default:
            throw ConfigError("criterion index out of range");
    }
}

std::vector<CriterionResult> run_acceptance_suite(uint64_t seed) {
    std::vector<CriterionResult> results;
    for (int i = 1; i <= acceptance_criterion_count(); ++i)
        results.push_back(run_acceptance_criterion(i, seed));
    return results;
}

}  // namespace qzk
