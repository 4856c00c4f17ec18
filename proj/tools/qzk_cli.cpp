// Command-line front end: protocol runs (in-process or TCP), simulator runs,
// impossibility experiments, benchmarks, and the acceptance suite.

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>

#include "qzk/adversary.hpp"
#include "qzk/harness.hpp"
#include "qzk/simulator.hpp"
#include "qzk/stats.hpp"
#include "qzk/transport.hpp"

using namespace qzk;

namespace {

Graph load_instance(const std::string& spec) {
    if (spec == "k4") return Graph::complete(4);
    if (spec == "k5") return Graph::complete(5);
    if (spec == "c5") return Graph::cycle_graph(5);
    if (spec == "bowtie") return Graph::bowtie();
    std::ifstream in(spec, std::ios::binary);
    if (!in) throw ConfigError("cannot open instance file: " + spec);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return Graph::deserialize(bytes);
}

void write_report(const Report& report, const std::string& out_path) {
    std::cout << report.to_text();
    if (out_path.empty()) return;
    std::ofstream out(out_path);
    if (!out) throw ConfigError("cannot write " + out_path);
    out << report.to_json();
    if (!report.histograms.empty()) {
        std::ofstream csv(out_path + ".csv");
        csv << report.to_csv();
    }
    std::cout << "report written to " << out_path << "\n";
}

int cmd_run_protocol(const std::string& instance, int lambda, int wi_reps, long sessions,
                     const std::string& transport, const std::string& listen,
                     const std::string& connect, uint64_t seed, const std::string& out) {
    Graph x = load_instance(instance);
    ProtocolParams params{lambda, wi_reps};
    auto witness = find_hamiltonian_cycle(x);

    if (transport == "tcp") {
        if (!listen.empty()) {
            long accepts = 0;
            for (long s = 0; s < sessions; ++s) {
                auto t = TcpTransport::listen_one(listen);
                VerifierSession verifier(x, params, s, derived_rng(seed ^ 0x5eedULL, s));
                if (drive_verifier(std::move(verifier), *t).kind == VerdictKind::Accept)
                    ++accepts;
            }
            std::cout << "verifier accepted " << accepts << "/" << sessions << " sessions\n";
            return accepts == sessions ? 0 : 1;
        }
        if (!connect.empty()) {
            long accepts = 0;
            for (long s = 0; s < sessions; ++s) {
                auto t = TcpTransport::connect(connect);
                ProverSession prover(x, witness, params, s, derived_rng(seed, s));
                if (drive_prover(std::move(prover), *t).kind == VerdictKind::Accept) ++accepts;
            }
            std::cout << "prover saw " << accepts << "/" << sessions << " accepts\n";
            return accepts == sessions ? 0 : 1;
        }
        throw ConfigError("tcp transport needs --listen or --connect");
    }

    Report report;
    report.config = ExperimentConfig{"run-protocol", lambda, x.vertices(), sessions, wi_reps,
                                     seed, out};
    long accepts = 0;
    const auto start = std::chrono::steady_clock::now();
    for (long s = 0; s < sessions; ++s) {
        Rng rng = derived_rng(seed, s);
        ProverSession prover(x, witness, params, s, Rng(rng()));
        VerifierSession verifier(x, params, s, Rng(rng()));
        Transcript tr = run_session(std::move(prover), std::move(verifier));
        if (tr.verdict.kind == VerdictKind::Accept) ++accepts;
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double rate = sessions ? static_cast<double>(accepts) / sessions : 0.0;
    const double want = witness ? 1.0 : 0.0;
    report.metrics.push_back(Metric{"accept_rate", rate, want, "==", rate == want,
                                    witness ? "honest completeness" : "soundness without witness"});
    write_report(report, out);
    return report.pass() ? 0 : 1;
}

int cmd_run_sim(const std::string& verifier_name, int width, int lambda, int wi_reps, long runs,
                uint64_t seed, const std::string& out) {
    auto zoo = build_zoo(width);
    const ZooVerifier* pick = nullptr;
    for (const auto& zv : zoo)
        if (zv.spec.name == verifier_name) pick = &zv;
    if (!pick) {
        std::cerr << "unknown verifier; available:";
        for (const auto& zv : zoo) std::cerr << " " << zv.spec.name;
        std::cerr << "\n";
        return 2;
    }
    ProtocolParams params{lambda, wi_reps};
    Report report;
    report.config = ExperimentConfig{"run-sim", lambda, pick->spec.width, runs, wi_reps, seed, out};
    std::vector<long> iter_hist(40, 0);
    long completed = 0, aborted = 0, budget = 0, space_violations = 0;
    double total_iters = 0;
    int peak_seen = 0;
    const auto start = std::chrono::steady_clock::now();
    for (long r = 0; r < runs; ++r) {
        Rng rng = derived_rng(seed, r);
        auto oracle = make_oracle(pick->spec, Graph::complete(4), params, rng());
        SimResult res = simulate(Graph::complete(4), *oracle, params, rng, 100000);
        peak_seen = std::max(peak_seen, res.peak_qubits);
        if (res.peak_qubits > 2 * pick->spec.width) ++space_violations;
        switch (res.status) {
            case SimStatus::Completed:
                ++completed;
                total_iters += static_cast<double>(res.iterations);
                ++iter_hist[std::min<size_t>(res.iterations, iter_hist.size() - 1)];
                break;
            case SimStatus::VerifierAborted: ++aborted; break;
            case SimStatus::IterationBudgetExceeded: ++budget; break;
        }
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.histograms["iterations"] = iter_hist;
    report.metrics.push_back(Metric{"completed", static_cast<double>(completed),
                                    static_cast<double>(runs), "of", true, "simulation outcomes"});
    report.metrics.push_back(Metric{"mirrored_aborts", static_cast<double>(aborted), 0, ">=", true,
                                    "verifier aborts mirrored by the simulator"});
    report.metrics.push_back(Metric{"budget_hits", static_cast<double>(budget), 0, "==",
                                    budget == 0, "iteration budget exhaustions (reported, never "
                                                 "silent)"});
    report.metrics.push_back(Metric{"mean_iterations",
                                    completed ? total_iters / completed : 0.0,
                                    std::pow(2.0, pick->spec.width + 1), "<=",
                                    completed == 0 || total_iters / completed <=
                                        std::pow(2.0, pick->spec.width + 1),
                                    "expected lookaheads below 2^{M+1}"});
    report.metrics.push_back(Metric{"peak_qubits", static_cast<double>(peak_seen),
                                    2.0 * pick->spec.width, "<=", space_violations == 0,
                                    "space contract f(s) = 2s"});
    Rng brng = derived_rng(seed, 0xb0);
    BoundReport bounds = bound_check(pick->spec, params, std::nullopt, brng);
    report.metrics.push_back(Metric{"bound_p", bounds.p, 0, ">=", true, "Tr(Lambda rho_res)"});
    report.metrics.push_back(Metric{"bound_p_prime", bounds.p_prime, bounds.bound, ">=",
                                    bounds.ok, "p' against (p/2^M)(1 - 2^-lambda)"});
    write_report(report, out);
    return report.pass() ? 0 : 1;
}

int cmd_run_impossibility(int n, int rounds, const std::string& policy_name, int lambda,
                          int wi_reps, long runs, uint64_t seed, const std::string& out) {
    if (rounds != 6)
        throw ConfigError("the wrapped protocol has 6 rounds; --rounds must be 6");
    ProbePolicy policy;
    if (policy_name == "straight_line") policy = ProbePolicy::StraightLine;
    else if (policy_name == "out_of_order") policy = ProbePolicy::OutOfOrder;
    else if (policy_name == "repeat_query") policy = ProbePolicy::RepeatQuery;
    else if (policy_name == "skip_query") policy = ProbePolicy::SkipQuery;
    else throw ConfigError("unknown policy: " + policy_name);

    ProtocolParams params{lambda, wi_reps};
    Report report;
    report.config = ExperimentConfig{"run-impossibility", lambda, n, runs, wi_reps, seed, out};
    long events = 0, accepts = 0, probe_attempts = 0, probe_successes = 0;
    std::vector<long> event_kinds(5, 0);  // j, b, c, d, e aggregates
    const auto start = std::chrono::steady_clock::now();
    for (long r = 0; r < runs; ++r) {
        Rng rng = derived_rng(seed, r);
        auto probe = run_probe_policy(policy, Graph::complete(4), std::vector<int>{0, 1, 2, 3},
                                      params, n, rng);
        events += probe.events.total();
        for (long v : probe.events.j) event_kinds[0] += v;
        for (long v : probe.events.b) event_kinds[1] += v;
        event_kinds[2] += probe.events.c;
        event_kinds[3] += probe.events.d;
        event_kinds[4] += probe.events.e;
        if (probe.success) ++accepts;
        probe_attempts += probe.probe_attempts;
        probe_successes += probe.probe_state_successes;
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.histograms["events_jbcde"] = event_kinds;
    report.metrics.push_back(Metric{"total_events", static_cast<double>(events), 0,
                                    policy == ProbePolicy::StraightLine ? "==" : ">=",
                                    policy != ProbePolicy::StraightLine || events == 0,
                                    "structure-lemma event counters"});
    report.metrics.push_back(Metric{"accept_rate",
                                    runs ? static_cast<double>(accepts) / runs : 0, 0, ">=", true,
                                    "wrapped-verifier accepts"});
    if (probe_attempts > 0) {
        const double rate = static_cast<double>(probe_successes) / probe_attempts;
        const double floor = std::pow(2.0, -n / 2.0);
        report.metrics.push_back(Metric{"probe_state_success_rate", rate,
                                        floor + three_sigma(floor, probe_attempts), "<=",
                                        rate <= floor + three_sigma(floor, probe_attempts),
                                        "the 2^{-n/2} subspace overlap floor"});
    }
    write_report(report, out);
    return report.pass() ? 0 : 1;
}

int cmd_bench() {
    using clock = std::chrono::steady_clock;
    Rng rng(1);
    auto time_it = [&](const std::string& name, long iters, auto&& fn) {
        const auto start = clock::now();
        for (long i = 0; i < iters; ++i) fn(i);
        const double us =
            std::chrono::duration<double, std::micro>(clock::now() - start).count() / iters;
        std::cout << "  " << name << ": " << us << " us/op over " << iters << " ops\n";
    };
    std::cout << "benchmarks:\n";
    Bits seed16 = random_bits(16, rng);
    time_it("prg_expand(16 -> 48)", 200000, [&](long) { (void)prg_expand(seed16, 48); });
    ReceiverMsg rmsg = sample_receiver_msg(16, rng);
    time_it("commit_bit lambda=16", 100000,
            [&](long i) { (void)commit_bit(rmsg, i & 1, seed16); });
    ProtocolParams params{16, 40};
    time_it("honest session lambda=16 t=40", 50, [&](long i) {
        ProverSession p(Graph::complete(4), std::vector<int>{0, 1, 2, 3}, params, i,
                        derived_rng(7, i));
        VerifierSession v(Graph::complete(4), params, i, derived_rng(8, i));
        (void)run_session(std::move(p), std::move(v));
    });
    time_it("simulate vs quantum_coin M=3", 50, [&](long i) {
        auto zoo = build_zoo(3);
        Rng r = derived_rng(9, i);
        auto oracle = make_oracle(zoo[4].spec, Graph::complete(4), params, r());
        (void)simulate(Graph::complete(4), *oracle, params, r, 100000);
    });
    time_it("project_A n=8 (direct)", 2000, [&](long i) {
        Rng r = derived_rng(10, i);
        Subspace a = sample_subspace(8, 4, r);
        (void)project_A(a, prepare_state(a), r);
    });
    return 0;
}

int cmd_all_acceptance(uint64_t seed, const std::string& out) {
    auto results = run_acceptance_suite(seed);
    bool all = true;
    std::ostringstream lines;
    for (const auto& r : results) {
        std::ostringstream line;
        line << (r.pass ? "PASS" : "FAIL") << "  criterion " << r.index << ": " << r.title;
        std::cout << line.str() << "\n";
        lines << line.str() << "\n      " << r.detail << "\n";
        all = all && r.pass;
    }
    std::cout << (all ? "ALL ACCEPTANCE CRITERIA PASS" : "ACCEPTANCE FAILURES PRESENT") << "\n";
    if (!out.empty()) {
        std::ofstream f(out);
        f << lines.str();
    }
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Desk-scale laboratory for a space-bounded quantum zero-knowledge protocol"};
    app.require_subcommand(1);

    // run-protocol
    std::string instance = "k4", transport = "inproc", listen, connect, out;
    int lambda = 16, wi_reps = 40, width = 3, rounds = 6, n = 8;
    long sessions = 20, runs = 100;
    uint64_t seed = 1;
    std::string verifier = "honest", policy = "straight_line", experiment = "completeness";

    auto* rp = app.add_subcommand("run-protocol", "run protocol sessions");
    rp->add_option("--instance", instance, "GRA1 file or one of k4,k5,c5,bowtie");
    rp->add_option("--lambda", lambda);
    rp->add_option("--wi-reps", wi_reps);
    rp->add_option("--sessions", sessions);
    rp->add_option("--transport", transport)->check(CLI::IsMember({"inproc", "tcp"}));
    rp->add_option("--listen", listen, "verifier side address host:port");
    rp->add_option("--connect", connect, "prover side address host:port");
    rp->add_option("--seed", seed);
    rp->add_option("--out", out, "write a JSON report");

    auto* rs = app.add_subcommand("run-sim", "run the rewinding simulator against a zoo verifier");
    rs->add_option("--verifier", verifier);
    rs->add_option("--M", width);
    rs->add_option("--lambda", lambda);
    rs->add_option("--wi-reps", wi_reps);
    rs->add_option("--runs", runs);
    rs->add_option("--seed", seed);
    rs->add_option("--out", out);

    auto* ri = app.add_subcommand("run-impossibility", "drive the contrived verifier");
    ri->add_option("--n", n);
    ri->add_option("--rounds", rounds);
    ri->add_option("--policy", policy,
                   "straight_line | out_of_order | repeat_query | skip_query");
    ri->add_option("--lambda", lambda);
    ri->add_option("--wi-reps", wi_reps);
    ri->add_option("--runs", runs);
    ri->add_option("--seed", seed);
    ri->add_option("--out", out);

    auto* re = app.add_subcommand("run-experiment", "run a named experiment");
    re->add_option("--name", experiment);
    re->add_option("--lambda", lambda);
    re->add_option("--width", width);
    re->add_option("--trials", runs);
    re->add_option("--wi-reps", wi_reps);
    re->add_option("--seed", seed);
    re->add_option("--out", out);

    auto* rb = app.add_subcommand("bench", "micro-benchmarks of the core operations");
    auto* ra = app.add_subcommand("all-acceptance", "run the acceptance suite");
    ra->add_option("--seed", seed);
    ra->add_option("--out", out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (rp->parsed())
            return cmd_run_protocol(instance, lambda, wi_reps, sessions, transport, listen,
                                    connect, seed, out);
        if (rs->parsed()) return cmd_run_sim(verifier, width, lambda, wi_reps, runs, seed, out);
        if (ri->parsed())
            return cmd_run_impossibility(n, rounds, policy, lambda, wi_reps, runs, seed, out);
        if (re->parsed()) {
            ExperimentConfig cfg{experiment, lambda, width, runs, wi_reps, seed, out};
            Report report = run_experiment(cfg);
            write_report(report, out);
            return report.pass() ? 0 : 1;
        }
        if (rb->parsed()) return cmd_bench();
        if (ra->parsed()) return cmd_all_acceptance(seed, out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
