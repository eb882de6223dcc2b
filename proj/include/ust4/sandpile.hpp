#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "ust4/forest.hpp"
#include "ust4/rng.hpp"

namespace ust4 {

inline constexpr std::int32_t kTopplingThreshold = kDegree;  // a site topples at height >= 2d

/// Grain heights on the sites of a wired region; grains leaving the region are lost.
class SandpileConfig {
public:
    SandpileConfig() = default;
    explicit SandpileConfig(Region region, std::int32_t fill = 0);

    const Region& region() const { return region_; }
    std::int32_t at(const Point& x) const { return h_[idx(x)]; }
    std::int32_t& at(const Point& x) { return h_[idx(x)]; }
    bool is_stable() const;
    std::int64_t mass() const;
    /// Heights in Region::sites() order.
    std::vector<std::int32_t> heights() const;
    void set_heights(const std::vector<std::int32_t>& h);

    /// Per-cell storage; cells that are not sites hold -1.
    std::vector<std::int32_t>& cells() { return h_; }
    const std::vector<std::int32_t>& cells() const { return h_; }

    bool operator==(const SandpileConfig& o) const { return h_ == o.h_; }

    /// Text dump: "sandpile radius R sites N" then one line per x0-row of heights.
    void dump(std::ostream& os) const;
    /// Reads a box config written by dump().
    static SandpileConfig read(std::istream& is);

private:
    std::size_t idx(const Point& x) const;
    Region region_;
    std::vector<std::int32_t> h_;
};

enum class Schedule {
    /// Queue of unstable sites, each toppled as often as its height allows.
    Fifo,
    /// One toppling at a time at a uniformly chosen unstable site.
    Random,
};

struct Stabilization {
    SandpileConfig config;
    /// Per-cell toppling counts.
    std::vector<std::uint64_t> odometer;
    std::uint64_t total_topplings = 0;
    /// Cells that toppled at least once, in order of first toppling.
    std::vector<std::int64_t> toppled;
    std::uint64_t odometer_at(const Point& x) const {
        return odometer[static_cast<std::size_t>(config.region().cell(x))];
    }
};

/// rng is required for Schedule::Random.
Stabilization stabilize(SandpileConfig config, Schedule schedule = Schedule::Fifo, RngStream* rng = nullptr);

/// Adds one grain at x to a stable config and stabilizes in place. Returns the
/// number of topplings; if `odometer` is given it receives per-cell counts keyed
/// by cell + 1.
std::uint64_t add_grain(SandpileConfig& config, const Point& x, FlatMap<std::uint64_t>* odometer = nullptr);

/// Dhar's burning test; config must be stable.
bool is_recurrent(const SandpileConfig& config);

class NotRecurrent : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Burning bijection. Generation of a site = its tree depth from the sink (sink
/// edges have depth 0). With k the number of edges to generation g-1 and b the
/// number of edges to generations <= g-2, the height is 8 - b - k + j where j is
/// the rank, in direction order, of the parent edge among those k edges.
SandpileConfig tree_to_recurrent(const OrientedForest& forest);
/// Inverse of tree_to_recurrent; throws NotRecurrent.
OrientedForest recurrent_to_tree(const SandpileConfig& config);

struct AvalancheRecord {
    /// Height at the origin before the added grain.
    std::int32_t origin_height = 0;
    /// (site, topplings) for every site that toppled.
    std::vector<std::pair<Point, std::uint64_t>> odometer;
    std::uint64_t cluster_size = 0;
    std::uint64_t total_topplings = 0;
    std::int64_t ext_radius = 0;
};

/// Uniform recurrent config on the wired region (Wilson tree through the
/// bijection), one grain added at the origin, stabilized.
AvalancheRecord sample_avalanche(const Region& region, RngStream& rng);
AvalancheRecord avalanche_from(SandpileConfig config, const Point& site);

}  // namespace ust4
