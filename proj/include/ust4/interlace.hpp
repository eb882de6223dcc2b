#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ust4/capacity.hpp"
#include "ust4/point.hpp"
#include "ust4/rng.hpp"
#include "ust4/walk.hpp"

namespace ust4 {

/// First visit of a trajectory to a site of K: the site and the site visited just before.
struct KVisit {
    Point site;
    Point previous;
};

/// One interlacement trajectory hitting K, parameterized by its first entry to K.
/// Both halves are killed on leaving Lambda_{R_traj}.
struct Trajectory {
    double arrival_time = 0.0;
    Point entry{};
    /// Walk from the entry point (kept only when requested).
    LatticePath forward;
    /// Time-reversed past from the entry point; never returns to K after step 0.
    LatticePath backward;
    /// First visits to sites of K in time order; the first one is the entry.
    std::vector<KVisit> visits;
    /// Rejected backward walks before acceptance.
    std::uint64_t rejections = 0;
};

struct WindowInterlacement {
    std::vector<Point> K;
    double t0 = 0.0, t1 = 0.0;
    std::int64_t r_traj = 0;
    double rate = 0.0;
    /// Sorted by arrival time.
    std::vector<Trajectory> trajectories;
};

struct InterlacementOptions {
    /// Killing radius; 0 selects 8 * diam_inf(K) + 64.
    std::int64_t r_traj = 0;
    bool keep_paths = false;
    std::uint64_t max_attempts = 1'000'000;
};

std::int64_t default_trajectory_radius(const std::vector<Point>& K);

/// Trajectories hitting K with arrival marks in [t0, t1]: count Poisson((t1 - t0) cap),
/// entry points from the harmonic measure of K, forward walks unconditioned.
/// Throws RejectionBudgetExceeded.
WindowInterlacement sample_interlacement(const std::vector<Point>& K, double t0, double t1,
                                         const CapacityEstimate& cap_est, RngStream& rng,
                                         const InterlacementOptions& opt = {});

/// One trajectory (arrival time left at 0).
Trajectory sample_trajectory(const std::vector<Point>& K, const PointSet& Kset, std::int64_t r_traj,
                             RngStream& rng, const InterlacementOptions& opt);

/// Extends the window past t1 with fresh arrivals until every site of K is hit
/// by a trajectory arriving after t.
void extend_until_covered(WindowInterlacement& w, double t, RngStream& rng, const InterlacementOptions& opt = {});

/// Aldous-Broder forest on K at time t: each x in K points along the reversal of
/// the edge by which the first trajectory arriving after t first enters x.
struct ABForest {
    std::vector<Point> K;
    /// Parent direction per site of K (index aligned with K); -1 if uncovered.
    std::vector<int> parent_dir;
    /// Index of the trajectory that sets each edge; -1 if uncovered.
    std::vector<std::int64_t> source;
    std::vector<Point> uncovered;
    bool complete() const { return uncovered.empty(); }
};

ABForest aldous_broder_window(const WindowInterlacement& w, double t);

enum class PastDynamics { Holds, Fails, Skipped };

/// Window form of the past-evolution identity: the K-restricted past of v at
/// time s equals the component of v in the K-restricted past at time t after
/// removing the sites of K hit by trajectories arriving in [s, t). Skipped when
/// v itself is hit in [s, t).
PastDynamics past_dynamics_check(const WindowInterlacement& w, double s, double t, const Point& v);

/// Sites of K whose AB future reaches v through sites of K only (v included).
std::vector<Point> restricted_past(const ABForest& f, const Point& v);

}  // namespace ust4
