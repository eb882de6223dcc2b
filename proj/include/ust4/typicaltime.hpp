#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ust4/forest.hpp"
#include "ust4/rng.hpp"
#include "ust4/walk.hpp"

namespace ust4 {

struct EscEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::uint64_t samples = 0;
};

/// Esc_k(eta^i): probability that k steps of a walk from eta_i avoid eta_0, ..., eta_{i-1}.
EscEstimate esc_probability(const LatticePath& eta, std::size_t i, std::uint64_t k, std::uint64_t samples,
                            RngStream& rng);

/// Rows i and columns k at which Esc is estimated. Both sorted, i starting at 0
/// and k at 1.
struct EscGrid {
    std::vector<std::size_t> i;
    std::vector<std::uint64_t> k;
};

/// k in {1, 2, 4, ...} up to n; i on a stride of max(1, n / 256).
EscGrid default_esc_grid(std::size_t n);
/// Every i in [0, n) and every k in [1, n].
EscGrid full_esc_grid(std::size_t n);

/// Esc_k(eta^i) on a grid. All columns of a row come from the same walks, so
/// each row is exactly non-increasing in k.
struct EscProfile {
    std::size_t n = 0;
    EscGrid grid;
    /// Row-major over (grid.i, grid.k).
    std::vector<double> value;
    std::vector<double> stderr_;
    std::uint64_t samples = 0;

    double at(std::size_t row, std::size_t col) const { return value[row * grid.k.size() + col]; }
};

/// Rows use independent streams rng.split(row), so the result does not depend
/// on the evaluation order.
EscProfile esc_profile(const LatticePath& eta, const EscGrid& grid, std::uint64_t samples, RngStream& rng);

class InsufficientProfile : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A_i = sum_{k=1}^{n} Esc_k(eta^i)^2 / k for 0 <= i < n, n = |eta|.
/// Quadrature: Esc is taken constant on [k_j, k_{j+1}) and each row stands for
/// every i in [i_r, i_{r+1}). Exact on the full grid.
std::vector<double> a_terms(const EscProfile& esc);

/// T~(eta) = sum_{i<n} A_i. Throws InsufficientProfile if the profile does not
/// match eta or the grid does not start at i = 0, k = 1.
double t_tilde(const LatticePath& eta, const EscProfile& esc);

/// sum_i A_i 1(A_i >= (ln n)^{1/3 + delta}) <= delta n.
bool classify_delta_good(const LatticePath& eta, const EscProfile& esc, double delta);

struct TimeRadius {
    double value = 0.0;
    /// Past vertex attaining the maximum.
    Point argmax{};
    std::uint64_t past_volume = 0;
    std::uint64_t intrinsic_radius = 0;
};

/// max over x in the past of origin of T~ of the tree path from origin to x.
/// Paths are read outward from the origin, so every past vertex y carries one
/// row Esc_k(path to y) shared by all paths through y; k runs over powers of
/// two up to the intrinsic radius, `esc_samples` walks per vertex.
TimeRadius time_radius(const OrientedForest& forest, const Point& origin, std::uint64_t esc_samples,
                       RngStream& rng);

}  // namespace ust4
