#include "qzk/stats.hpp"

#include <algorithm>
#include <cmath>

namespace qzk {

namespace {

// Lower regularized incomplete gamma by series expansion (x < a + 1).
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized incomplete gamma by continued fraction (x >= a + 1).
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_q(double a, double x) {
    if (x < 0 || a <= 0) throw StatError("gamma_q: bad arguments");
    if (x == 0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double chi2_pvalue(double value, int dof) {
    if (dof <= 0) return (value > 0) ? 0.0 : 1.0;
    return gamma_q(dof / 2.0, value / 2.0);
}

double chi2_two_sample_pvalue(const std::vector<long>& a, const std::vector<long>& b) {
    if (a.empty() || a.size() != b.size()) throw StatError("chi2: empty or mismatched tables");
    double ta = 0, tb = 0;
    for (long v : a) ta += v;
    for (long v : b) tb += v;
    if (ta == 0 || tb == 0) throw StatError("chi2: a sample is empty");
    const double ka = std::sqrt(tb / ta), kb = std::sqrt(ta / tb);
    double chi2 = 0;
    int dof = -1;
    for (size_t i = 0; i < a.size(); ++i) {
        const double n = static_cast<double>(a[i] + b[i]);
        if (n == 0) continue;
        const double d = ka * a[i] - kb * b[i];
        chi2 += d * d / n;
        ++dof;
    }
    if (dof <= 0) return 1.0;
    return chi2_pvalue(chi2, dof);
}

double chi2_goodness_pvalue(const std::vector<long>& counts, const std::vector<double>& probs) {
    if (counts.empty() || counts.size() != probs.size())
        throw StatError("chi2: empty or mismatched tables");
    double total = 0;
    for (long v : counts) total += v;
    if (total == 0) throw StatError("chi2: no observations");
    double chi2 = 0;
    int dof = -1;
    for (size_t i = 0; i < counts.size(); ++i) {
        const double e = probs[i] * total;
        if (e <= 0) {
            if (counts[i] != 0) return 0.0;
            continue;
        }
        const double d = counts[i] - e;
        chi2 += d * d / e;
        ++dof;
    }
    if (dof <= 0) return 1.0;
    return chi2_pvalue(chi2, dof);
}

double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.empty() || p.size() != q.size()) throw StatError("tv_distance: bad tables");
    double acc = 0;
    for (size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
    return acc / 2.0;
}

double tv_distance_counts(const std::vector<long>& a, const std::vector<long>& b) {
    if (a.empty() || a.size() != b.size()) throw StatError("tv_distance: bad tables");
    double ta = 0, tb = 0;
    for (long v : a) ta += v;
    for (long v : b) tb += v;
    if (ta == 0 || tb == 0) throw StatError("tv_distance: empty sample");
    double acc = 0;
    for (size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] / ta - b[i] / tb);
    return acc / 2.0;
}

BinomialInterval binomial_ci(long successes, long trials, double z) {
    if (trials <= 0) throw StatError("binomial_ci: no trials");
    const double p = static_cast<double>(successes) / trials;
    const double s = std::sqrt(std::max(p * (1 - p), 1e-12) / trials);
    return BinomialInterval{std::max(0.0, p - z * s), std::min(1.0, p + z * s)};
}

long Histogram::total() const {
    long t = 0;
    for (const auto& [k, v] : counts_) t += v;
    return t;
}

std::pair<std::vector<long>, std::vector<long>> Histogram::aligned(const Histogram& a,
                                                                   const Histogram& b) {
    std::vector<long> va, vb;
    auto ia = a.counts_.begin();
    auto ib = b.counts_.begin();
    while (ia != a.counts_.end() || ib != b.counts_.end()) {
        if (ib == b.counts_.end() || (ia != a.counts_.end() && ia->first < ib->first)) {
            va.push_back(ia->second);
            vb.push_back(0);
            ++ia;
        } else if (ia == a.counts_.end() || ib->first < ia->first) {
            va.push_back(0);
            vb.push_back(ib->second);
            ++ib;
        } else {
            va.push_back(ia->second);
            vb.push_back(ib->second);
            ++ia;
            ++ib;
        }
    }
    return {va, vb};
}

}  // namespace qzk
