#include "ust4/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <stdexcept>

namespace ust4 {

void MeanVar::merge(const MeanVar& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
        *this = o;
        return;
    }
    double n = static_cast<double>(n_ + o.n_);
    double d = o.mean_ - mean_;
    mean_ += d * static_cast<double>(o.n_) / n;
    m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
    n_ += o.n_;
}

double chi_square_sf(double stat, double dof) {
    if (dof <= 0) return 1.0;
    boost::math::chi_squared dist(dof);
    return boost::math::cdf(boost::math::complement(dist, std::max(0.0, stat)));
}

ChiSquareResult chi_square_test(const std::vector<double>& observed, const std::vector<double>& expected,
                                double min_expected) {
    if (observed.size() != expected.size()) throw std::invalid_argument("chi_square_test: size mismatch");
    double stat = 0.0, pool_o = 0.0, pool_e = 0.0;
    int cells = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] < min_expected) {
            pool_o += observed[i];
            pool_e += expected[i];
            continue;
        }
        double d = observed[i] - expected[i];
        stat += d * d / expected[i];
        ++cells;
    }
    if (pool_e > 0) {
        double d = pool_o - pool_e;
        stat += d * d / pool_e;
        ++cells;
    }
    ChiSquareResult r;
    r.statistic = stat;
    r.dof = cells - 1;
    r.p_value = chi_square_sf(stat, r.dof);
    return r;
}

double kolmogorov_sf(double lambda) {
    if (lambda < 0.2) return 1.0;
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

namespace {

/// sup over x of (F_b(x) - F_a(x)) and of (F_a(x) - F_b(x)).
std::pair<double, double> ecdf_gaps(std::vector<double>& a, std::vector<double>& b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double up = 0.0, down = 0.0;
    while (i < a.size() || j < b.size()) {
        double x;
        if (j >= b.size() || (i < a.size() && a[i] <= b[j]))
            x = a[i];
        else
            x = b[j];
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        double fa = static_cast<double>(i) / na, fb = static_cast<double>(j) / nb;
        up = std::max(up, fb - fa);
        down = std::max(down, fa - fb);
    }
    return {up, down};
}

}  // namespace

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    auto [up, down] = ecdf_gaps(a, b);
    double d = std::max(up, down);
    double ne = static_cast<double>(a.size()) * static_cast<double>(b.size()) /
                static_cast<double>(a.size() + b.size());
    double sn = std::sqrt(ne);
    return {d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)};
}

KsResult ks_one_sided(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_one_sided: empty sample");
    auto [up, down] = ecdf_gaps(a, b);
    (void)down;
    double ne = static_cast<double>(a.size()) * static_cast<double>(b.size()) /
                static_cast<double>(a.size() + b.size());
    return {up, std::min(1.0, std::exp(-2.0 * ne * up * up))};
}

Interval wilson_score(std::uint64_t k, std::uint64_t n, double z) {
    if (n == 0) return {0.0, 1.0};
    double nn = static_cast<double>(n);
    double p = static_cast<double>(k) / nn;
    double z2 = z * z;
    double denom = 1.0 + z2 / nn;
    double center = (p + z2 / (2 * nn)) / denom;
    double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / denom;
    return {std::max(0.0, std::min(p, center - half)), std::min(1.0, std::max(p, center + half))};
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& weights) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear_fit: need >= 2 points");
    const std::size_t n = x.size();
    auto w = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += w(i);
        sx += w(i) * x[i];
        sy += w(i) * y[i];
    }
    double mx = sx / sw, my = sy / sw;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += w(i) * (x[i] - mx) * (x[i] - mx);
        sxy += w(i) * (x[i] - mx) * (y[i] - my);
        syy += w(i) * (y[i] - my) * (y[i] - my);
    }
    LinearFit f;
    f.slope = sxx > 0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    double ss_res = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = y[i] - (f.slope * x[i] + f.intercept);
        f.residuals.push_back(r);
        ss_res += w(i) * r * r;
    }
    f.r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;
    return f;
}

}  // namespace ust4
