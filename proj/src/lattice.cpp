#include "ust4/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ust4 {

ScalarField::ScalarField(std::int64_t radius, double fill) : radius_(radius), side_(2 * radius + 3) {
    data_.assign(static_cast<std::size_t>(side_ * side_ * side_ * side_), fill);
}

Estimate green_estimate(const Point& x, std::uint64_t n_samples, std::uint64_t horizon, RngStream& rng) {
    if (n_samples == 0) throw std::invalid_argument("green_estimate: n_samples must be positive");
    if (!packable(x)) throw std::out_of_range("green_estimate: target outside packed range");
    const std::uint64_t target = pack(x);
    double sum = 0.0, sum_sq = 0.0;
    for (std::uint64_t s = 0; s < n_samples; ++s) {
        std::uint64_t k = pack(kOrigin);
        std::uint64_t visits = (k == target) ? 1 : 0;
        for (std::uint64_t t = 0; t < horizon; ++t) {
            if ((t & (kPackMargin - 1)) == 0 && !packed_has_margin(k))
                throw std::out_of_range("green_estimate: walk left packed range");
            k = pack_step(k, rng.direction());
            visits += (k == target);
        }
        double v = static_cast<double>(visits);
        sum += v;
        sum_sq += v * v;
    }
    double n = static_cast<double>(n_samples);
    double mean = sum / n;
    double var = n > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1)) : 0.0;
    return Estimate{mean, std::sqrt(var / n), n_samples, kGreenTailConstant / static_cast<double>(horizon)};
}

namespace {

enum : std::uint8_t { kFree = 0, kFixed = 1 };

struct Grid {
    std::int64_t R, S;
    std::array<std::int64_t, kDegree> off;
};

Grid make_grid(std::int64_t R) {
    Grid g{R, 2 * R + 3, {}};
    std::int64_t stride = 1;
    for (int d = 0; d < kDim; ++d) {
        g.off[static_cast<std::size_t>(2 * d)] = stride;
        g.off[static_cast<std::size_t>(2 * d + 1)] = -stride;
        stride *= g.S;
    }
    return g;
}

std::vector<double> source_field(const ScalarField& h, const Box& box,
                                 const std::vector<std::pair<Point, double>>& source) {
    std::vector<double> f;
    if (source.empty()) return f;
    f.assign(h.data().size(), 0.0);
    for (const auto& [p, v] : source) {
        if (!box.contains(p)) throw std::invalid_argument("dirichlet_solve: source outside box");
        f[static_cast<std::size_t>(h.index(p))] += v;
    }
    return f;
}

std::vector<std::uint8_t> site_kinds(const ScalarField& h, const Box& box, const std::vector<Point>& absorbing) {
    const std::int64_t S = h.side();
    std::vector<std::uint8_t> kind(h.data().size(), kFixed);
    const std::int64_t R = box.radius;
    for (std::int64_t x3 = 1; x3 < S - 1; ++x3)
        for (std::int64_t x2 = 1; x2 < S - 1; ++x2)
            for (std::int64_t x1 = 1; x1 < S - 1; ++x1) {
                std::int64_t base = ((x3 * S + x2) * S + x1) * S;
                std::fill(kind.begin() + base + 1, kind.begin() + base + S - 1, kFree);
            }
    for (const auto& a : absorbing) {
        if (norm_inf(a) > R) throw std::invalid_argument("dirichlet_solve: absorbing site outside box");
        kind[static_cast<std::size_t>(h.index(a))] = kFixed;
    }
    return kind;
}

double residual_pass(const ScalarField& h, const std::vector<std::uint8_t>& kind, const std::vector<double>& f,
                     const Grid& g) {
    const auto& v = h.data();
    double r = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (kind[i] != kFree) continue;
        double m = 0.0;
        for (auto o : g.off) m += v[static_cast<std::size_t>(static_cast<std::int64_t>(i) + o)];
        double res = m / kDegree + (f.empty() ? 0.0 : f[i]) - v[i];
        r = std::max(r, std::abs(res));
    }
    return r;
}

}  // namespace

ScalarField dirichlet_solve(const Box& box, const std::vector<Point>& absorbing, double boundary_value,
                            const std::vector<std::pair<Point, double>>& source, const DirichletOptions& opt) {
    return dirichlet_solve(
        box, absorbing, [boundary_value](const Point&) { return boundary_value; }, source, opt);
}

ScalarField dirichlet_solve(const Box& box, const std::vector<Point>& absorbing, const BoundaryFn& boundary,
                            const std::vector<std::pair<Point, double>>& source, const DirichletOptions& opt) {
    if (box.radius < 0) throw std::invalid_argument("dirichlet_solve: negative radius");
    if (box.radius > opt.radius_cap)
        throw std::invalid_argument("dirichlet_solve: radius " + std::to_string(box.radius) + " above cap " +
                                    std::to_string(opt.radius_cap));
    const std::int64_t R = box.radius;
    ScalarField h(R);
    const Grid g = make_grid(R);
    const std::int64_t S = g.S;
    auto kind = site_kinds(h, box, absorbing);
    auto f = source_field(h, box, source);

    // Shell values.
    auto& v = h.data();
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::int64_t j = static_cast<std::int64_t>(i);
        Point p;
        bool shell = false;
        for (int d = 0; d < kDim; ++d) {
            p[d] = j % S - (R + 1);
            j /= S;
            if (std::abs(p[d]) == R + 1) shell = true;
        }
        if (shell) v[i] = boundary(p);
    }

    const double rho = std::cos(std::numbers::pi / static_cast<double>(2 * R + 2));
    const double omega = 2.0 / (1.0 + std::sqrt(std::max(0.0, 1.0 - rho * rho)));
    const double inv_deg = 1.0 / kDegree;

    double res = residual_pass(h, kind, f, g);
    std::uint64_t it = 0;
    while (res > opt.tolerance) {
        if (it >= opt.max_iterations)
            throw DirichletError("dirichlet_solve: no convergence, residual " + std::to_string(res), res);
        for (int color = 0; color < 2; ++color) {
            for (std::int64_t x3 = 1; x3 < S - 1; ++x3)
                for (std::int64_t x2 = 1; x2 < S - 1; ++x2)
                    for (std::int64_t x1 = 1; x1 < S - 1; ++x1) {
                        std::int64_t base = ((x3 * S + x2) * S + x1) * S;
                        std::int64_t start = 1 + ((x1 + x2 + x3 + 1 + color) & 1);
                        for (std::int64_t x0 = start; x0 < S - 1; x0 += 2) {
                            auto i = static_cast<std::size_t>(base + x0);
                            if (kind[i] != kFree) continue;
                            double m = v[i + 1] + v[i - 1] + v[i + static_cast<std::size_t>(S)] +
                                       v[i - static_cast<std::size_t>(S)] +
                                       v[i + static_cast<std::size_t>(S * S)] +
                                       v[i - static_cast<std::size_t>(S * S)] +
                                       v[i + static_cast<std::size_t>(S * S * S)] +
                                       v[i - static_cast<std::size_t>(S * S * S)];
                            double target = m * inv_deg + (f.empty() ? 0.0 : f[i]);
                            v[i] += omega * (target - v[i]);
                        }
                    }
        }
        ++it;
        if (it % 8 == 0) res = residual_pass(h, kind, f, g);
    }
    return h;
}

double dirichlet_residual(const ScalarField& h, const Box& box, const std::vector<Point>& absorbing,
                          const std::vector<std::pair<Point, double>>& source) {
    auto kind = site_kinds(h, box, absorbing);
    auto f = source_field(h, box, source);
    return residual_pass(h, kind, f, make_grid(box.radius));
}

}  // namespace ust4
