// Numeric helpers for the statistical acceptance tests: chi-square tests with
// p-values from the regularized incomplete gamma, total variation distance,
// and binomial confidence material.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qzk/common.hpp"

namespace qzk {

// Upper regularized incomplete gamma Q(a, x).
double gamma_q(double a, double x);

// P[chi2 with dof degrees of freedom >= value].
double chi2_pvalue(double value, int dof);

// Two-sample equality test between count tables (same binning). Returns the
// p-value; throws StatError on empty or mismatched tables.
double chi2_two_sample_pvalue(const std::vector<long>& a, const std::vector<long>& b);

// Goodness-of-fit of counts against expected probabilities.
double chi2_goodness_pvalue(const std::vector<long>& counts,
                            const std::vector<double>& probs);

double tv_distance(const std::vector<double>& p, const std::vector<double>& q);
double tv_distance_counts(const std::vector<long>& a, const std::vector<long>& b);

struct BinomialInterval {
    double lo = 0;
    double hi = 1;
};
// Normal-approximation interval p_hat +/- z * sigma.
BinomialInterval binomial_ci(long successes, long trials, double z = 3.0);

// Convenience: 3-sigma upper tolerance around an expected rate.
inline double three_sigma(double p, long trials) {
    if (trials <= 0) throw StatError("three_sigma: no trials");
    double clamped = std::min(std::max(p, 1e-12), 1.0 - 1e-12);
    return 3.0 * std::sqrt(clamped * (1.0 - clamped) / static_cast<double>(trials));
}

// Histogram over string-valued observations, with a stable bin order.
class Histogram {
public:
    void add(const std::string& key) { ++counts_[key]; }
    long total() const;
    // Aligns two histograms on the union of keys.
    static std::pair<std::vector<long>, std::vector<long>> aligned(const Histogram& a,
                                                                   const Histogram& b);

private:
    std::map<std::string, long> counts_;
};

}  // namespace qzk
