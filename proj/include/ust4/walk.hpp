#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ust4/flat_map.hpp"
#include "ust4/point.hpp"
#include "ust4/rng.hpp"

namespace ust4 {

/// A nearest-neighbour path; n steps means n + 1 sites.
struct LatticePath {
    std::vector<Point> sites;

    LatticePath() = default;
    explicit LatticePath(std::vector<Point> s) : sites(std::move(s)) {}

    std::size_t length() const { return sites.empty() ? 0 : sites.size() - 1; }
    const Point& operator[](std::size_t i) const { return sites[i]; }
    const Point& front() const { return sites.front(); }
    const Point& back() const { return sites.back(); }

    /// w[a, b], inclusive.
    LatticePath slice(std::size_t a, std::size_t b) const;
    LatticePath reversed() const;

    /// True if consecutive sites are lattice neighbours.
    bool is_nearest_neighbor() const;
    bool is_self_avoiding() const;

    friend bool operator==(const LatticePath&, const LatticePath&) = default;
};

enum class StopTag { HitTarget, Escaped, HorizonReached, GeometricKill };

const char* to_string(StopTag t);

struct StopOutcome {
    StopTag tag = StopTag::HorizonReached;
    std::size_t index = 0;
    std::optional<Point> hit;
};

LatticePath srw(const Point& start, std::uint64_t steps, RngStream& rng);

/// Walk until the first visit to target, the first exit from Lambda_{escape_radius},
/// or `horizon` steps, whichever comes first.
std::pair<LatticePath, StopOutcome> srw_until(const Point& start, const PointSet& target,
                                              std::int64_t escape_radius, std::uint64_t horizon, RngStream& rng);

/// Walk killed with probability 1/(t+1) before each step; capped at `horizon`
/// steps (default 64 t).
std::pair<LatticePath, StopOutcome> srw_geometric(const Point& start, double mean_t, RngStream& rng,
                                                  std::optional<std::uint64_t> horizon = std::nullopt);

/// All t with path[0, t] and path(t, end] disjoint.
std::vector<std::size_t> cut_times(const LatticePath& path);

class RejectionBudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct NoReturnSample {
    LatticePath path;
    std::uint64_t attempts = 0;
};

/// Walk of `steps` steps (or until ||X - start||_inf > escape_radius) conditioned
/// not to revisit start, by rejection.
NoReturnSample srw_no_return(const Point& start, std::uint64_t steps, std::int64_t escape_radius, RngStream& rng,
                             std::uint64_t max_attempts = 1'000'000);

}  // namespace ust4
