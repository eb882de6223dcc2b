#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ust4/lattice.hpp"
#include "ust4/point.hpp"
#include "ust4/rng.hpp"

namespace ust4 {

enum class CapMethod { MC, Exact };

const char* to_string(CapMethod m);

/// Conductance c(x) of every site.
inline constexpr double kConductance = 8.0;

struct CapacityOptions {
    /// MC: escape radius R; walks run to 2R and the two radii are extrapolated.
    std::int64_t r_esc = 512;
    /// MC: escape walks per site (all-sites mode).
    std::uint64_t samples_per_site = 1000;
    /// MC: if nonzero, estimate by this many uniformly drawn sites, one walk each.
    std::uint64_t site_draws = 0;
    /// Exact: radii R and 2R with R = max(exact_min_radius, extent + exact_margin).
    std::int64_t exact_min_radius = 6;
    std::int64_t exact_margin = 3;
    std::size_t exact_max_sites = 200;
    std::int64_t exact_max_diameter = 32;
    DirichletOptions solver{};
};

struct CapacityEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    CapMethod method = CapMethod::Exact;
    /// Radii used for the two-radius extrapolation.
    std::int64_t radius_small = 0, radius_large = 0;
    /// Unextrapolated values at the two radii.
    double value_small = 0.0, value_large = 0.0;
    std::uint64_t walks = 0;
    /// Set when the exact backend was requested but could not be used.
    bool fell_back_to_mc = false;
    std::string note;
};

/// P_x(tau_A^+ = infinity), for x in A.
CapacityEstimate escape_probability(const Point& x, const std::vector<Point>& A, CapMethod method, RngStream& rng,
                                    const CapacityOptions& opt = {});

/// cap(A) = sum over A of 8 P_x(tau_A^+ = infinity).
CapacityEstimate capacity(const std::vector<Point>& A, CapMethod method, RngStream& rng,
                          const CapacityOptions& opt = {});

/// chi~(A,B) = 8 sum_{x in A} P_x(tau_A^+ = infinity) P_x(tau_B < infinity).
CapacityEstimate chi_tilde(const std::vector<Point>& A, const std::vector<Point>& B, CapMethod method,
                           RngStream& rng, const CapacityOptions& opt = {});

struct Decomposition {
    double cap_a = 0, cap_b = 0, cap_ab = 0, chi_ab = 0, chi_ba = 0, epsilon = 0;
    double cap_intersection = 0;
    /// Tolerance used for the bound check.
    double tolerance = 1e-3;
    /// 0 <= epsilon <= cap(A intersect B) within tolerance.
    bool within_bounds = true;
    std::int64_t radius_small = 0, radius_large = 0;
    /// epsilon evaluated at each radius separately (the identity holds at every radius).
    double epsilon_small = 0, epsilon_large = 0;
};

/// cap(A u B) = cap A + cap B - chi(A,B) - chi(B,A) + epsilon, every term from
/// the exact backend, chi from its definition with the tau^+_{A u B} escape.
Decomposition decomposition_check(const std::vector<Point>& A, const std::vector<Point>& B,
                                  const CapacityOptions& opt = {}, double tolerance = 1e-3);

/// Exact-backend fields at one radius: escape probabilities of each site of A
/// and hitting probabilities of A from arbitrary sites.
class KilledWalkSolution {
public:
    KilledWalkSolution(const std::vector<Point>& A, std::int64_t radius, const DirichletOptions& opt = {});
    std::int64_t radius() const { return radius_; }
    /// P_x(tau_A^+ > exit of Lambda_R).
    double escape(const Point& x) const;
    /// P_x(tau_A < exit of Lambda_R).
    double hit(const Point& x) const;
    double capacity() const;

private:
    std::vector<Point> A_;
    std::int64_t radius_;
    ScalarField h_;
};

/// Radius the exact backend uses for A (the small one of the pair).
std::int64_t exact_radius(const std::vector<Point>& sets_union, const CapacityOptions& opt);

/// Unique sites, sorted.
std::vector<Point> normalize_set(std::vector<Point> A);
std::vector<Point> set_union(const std::vector<Point>& A, const std::vector<Point>& B);
std::vector<Point> set_intersection(const std::vector<Point>& A, const std::vector<Point>& B);

}  // namespace ust4
