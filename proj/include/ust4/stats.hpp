#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace ust4 {

/// Running mean and variance (Welford).
class MeanVar {
public:
    void add(double x) {
        ++n_;
        double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }
    void merge(const MeanVar& o);
    std::uint64_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double stderr_() const { return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Upper tail P(chi2_dof >= stat).
double chi_square_sf(double stat, double dof);

struct ChiSquareResult {
    double statistic = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
};

/// Goodness of fit of observed counts against expected counts. Cells with
/// expected count below min_expected are pooled into one cell.
ChiSquareResult chi_square_test(const std::vector<double>& observed, const std::vector<double>& expected,
                                double min_expected = 5.0);

/// Two-sample Kolmogorov-Smirnov test (asymptotic p-value).
struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// One-sample KS against a CDF given on a sorted sample.
template <class Cdf>
KsResult ks_one_sample(std::vector<double> a, Cdf cdf);

/// Kolmogorov distribution upper tail Q(lambda).
double kolmogorov_sf(double lambda);

/// One-sided two-sample KS: statistic sup_x (F_b(x) - F_a(x)), testing the
/// alternative that a is stochastically smaller than b. p-value exp(-2 n_e D^2).
KsResult ks_one_sided(std::vector<double> a, std::vector<double> b);

struct Interval {
    double lo = 0.0, hi = 1.0;
};

/// Wilson score interval for k successes out of n at normal quantile z.
Interval wilson_score(std::uint64_t k, std::uint64_t n, double z = 1.959963984540054);

/// Ordinary least squares y = a x + c.
struct LinearFit {
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
    std::vector<double> residuals;
};
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& weights = {});

template <class Cdf>
KsResult ks_one_sample(std::vector<double> a, Cdf cdf) {
    std::sort(a.begin(), a.end());
    double n = static_cast<double>(a.size());
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double f = cdf(a[i]);
        d = std::max(d, std::max(f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f));
    }
    double sn = std::sqrt(n);
    return {d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)};
}

}  // namespace ust4
