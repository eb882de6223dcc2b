#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ust4/point.hpp"
#include "ust4/rng.hpp"

namespace ust4 {

/// Lambda_r = [-r, r]^4, optionally wired (everything outside identified to a sink).
struct Box {
    std::int64_t radius = 0;
    bool wired = true;

    bool contains(const Point& p) const { return norm_inf(p) <= radius; }
    std::int64_t side() const { return 2 * radius + 1; }
    std::int64_t volume() const { return side() * side() * side() * side(); }

    /// Dense row-major index of a site (x0 fastest).
    std::int64_t index(const Point& p) const {
        std::int64_t s = side(), i = 0;
        for (int d = kDim - 1; d >= 0; --d) i = i * s + (p[d] + radius);
        return i;
    }
    Point site(std::int64_t i) const {
        Point p;
        std::int64_t s = side();
        for (int d = 0; d < kDim; ++d) {
            p[d] = i % s - radius;
            i /= s;
        }
        return p;
    }
};

/// Values on Lambda_{r+1}: the box together with its boundary shell.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(std::int64_t radius, double fill = 0.0);

    std::int64_t radius() const { return radius_; }
    std::int64_t side() const { return side_; }
    bool covers(const Point& p) const { return norm_inf(p) <= radius_ + 1; }
    double at(const Point& p) const { return data_[static_cast<std::size_t>(index(p))]; }
    double& at(const Point& p) { return data_[static_cast<std::size_t>(index(p))]; }

    std::int64_t index(const Point& p) const {
        std::int64_t i = 0;
        for (int d = kDim - 1; d >= 0; --d) i = i * side_ + (p[d] + radius_ + 1);
        return i;
    }
    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

private:
    std::int64_t radius_ = 0;
    std::int64_t side_ = 0;
    std::vector<double> data_;
};

struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::uint64_t samples = 0;
    /// Deterministic bound on the bias from truncation (0 if none).
    double truncation_bound = 0.0;
};

/// Monte Carlo estimate of G(x) = expected visits to x by a walk from 0.
/// The truncation bound is C / horizon with C = 8.
Estimate green_estimate(const Point& x, std::uint64_t n_samples, std::uint64_t horizon, RngStream& rng);

inline constexpr double kGreenTailConstant = 8.0;

struct DirichletOptions {
    std::int64_t radius_cap = 48;
    double tolerance = 1e-10;
    std::uint64_t max_iterations = 1'000'000;
};

class DirichletError : public std::runtime_error {
public:
    DirichletError(const std::string& what, double residual) : std::runtime_error(what), residual(residual) {}
    double residual;
};

using BoundaryFn = std::function<double(const Point&)>;

/// Solve h = mean of neighbors + source on Lambda_R \ absorbing, with h = 0 on
/// absorbing and h = boundary on the shell ||x||_inf = R + 1.
ScalarField dirichlet_solve(const Box& box, const std::vector<Point>& absorbing, double boundary_value,
                            const std::vector<std::pair<Point, double>>& source = {},
                            const DirichletOptions& opt = {});
ScalarField dirichlet_solve(const Box& box, const std::vector<Point>& absorbing, const BoundaryFn& boundary,
                            const std::vector<std::pair<Point, double>>& source = {},
                            const DirichletOptions& opt = {});

/// Max over free sites of |mean of neighbors + source - h|.
double dirichlet_residual(const ScalarField& h, const Box& box, const std::vector<Point>& absorbing,
                          const std::vector<std::pair<Point, double>>& source = {});

}  // namespace ust4
