// Experiment orchestration: named experiments over the other modules, metric
// reports with machine (JSON) and human (text table) output, and the
// acceptance suite binding every headline claim to one named metric.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "qzk/common.hpp"

namespace qzk {

struct ExperimentConfig {
    std::string name;
    int lambda = 16;
    int width = 3;  // M for simulator experiments, n for subspace experiments
    long trials = 1000;
    int wi_reps = 40;
    uint64_t seed = 1;
    std::string out_path;  // empty: no file output
};

struct Metric {
    std::string name;
    double value = 0;
    double threshold = 0;
    std::string comparison;  // "<=", ">=", "==", "in[a,b]" rendered as text
    bool pass = false;
    std::string anchor;  // the quantitative claim this metric checks
};

struct Report {
    ExperimentConfig config;
    std::vector<Metric> metrics;
    std::map<std::string, std::vector<long>> histograms;
    double wall_seconds = 0;

    bool pass() const;
    std::string to_json(bool include_wall = true) const;
    std::string to_text() const;
    // Histogram CSV ("histogram,bin,count" rows).
    std::string to_csv() const;
};

// Known experiments: completeness, soundness-guessing, soundness-mauling,
// mixed-state-bound, sim-iterations, sim-tail, space-bound,
// binding-exhaustive, subspace-machinery, clone-floor, impossibility-events,
// extraction-gap, view-chi2.
Report run_experiment(const ExperimentConfig& cfg);
std::vector<std::string> experiment_names();

// The acceptance suite: every headline criterion at its pinned parameters.
struct CriterionResult {
    int index = 0;
    std::string title;
    bool pass = false;
    std::string detail;
    double wall_seconds = 0;
};
CriterionResult run_acceptance_criterion(int index, uint64_t seed);
std::vector<CriterionResult> run_acceptance_suite(uint64_t seed);
int acceptance_criterion_count();

}  // namespace qzk
