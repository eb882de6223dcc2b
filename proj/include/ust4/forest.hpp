#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ust4/flat_map.hpp"
#include "ust4/point.hpp"
#include "ust4/rng.hpp"
#include "ust4/walk.hpp"

namespace ust4 {

/// Finite set of lattice sites whose complement is wired into one sink. Either
/// a full box Lambda_R or an arbitrary patch. Sites are stored in a padded
/// bounding box so that every neighbour of a site has a cell index.
class Region {
public:
    static Region box(std::int64_t radius);
    static Region patch(const std::vector<Point>& sites);

    bool is_box() const { return is_box_; }
    /// Box radius; for a patch, the radius of the smallest centred box containing it.
    std::int64_t radius() const { return radius_; }
    std::size_t size() const { return size_; }

    bool contains(const Point& p) const;
    /// Cell index of p; p must lie in the padded bounding box.
    std::int64_t cell(const Point& p) const;
    Point point(std::int64_t cell) const;
    std::int64_t cell_count() const { return cell_count_; }
    std::int64_t delta(int d) const { return delta_[static_cast<std::size_t>(d)]; }

    /// Sites in canonical order (x0 fastest within each coordinate layout).
    std::vector<Point> sites() const;
    /// Visit the cells of all sites: origin first (when present), then outward by ||.||_inf shells.
    void for_each_spiral_cell(const std::function<void(std::int64_t)>& f) const;
    /// Visit the cells of all sites in canonical order.
    void for_each_cell(const std::function<void(std::int64_t)>& f) const;

private:
    bool is_box_ = true;
    std::int64_t radius_ = 0;
    std::size_t size_ = 0;
    std::array<std::int64_t, kDim> lo_{};
    std::array<std::int64_t, kDim> side_{};
    std::array<std::int64_t, kDim> stride_{};
    std::array<std::int64_t, kDegree> delta_{};
    std::int64_t cell_count_ = 0;
    std::vector<Point> patch_sites_;
};

/// Parent encoding per site: direction 0..7 of the parent edge (a direction
/// leaving the region is an edge to the sink), or kRootDir for the wired
/// vertex v of the v-wired forest.
inline constexpr std::uint8_t kRootDir = 8;

class ForestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PastSummary {
    Point origin{};
    std::uint64_t intrinsic_radius = 0;
    std::int64_t extrinsic_radius = 0;
    std::uint64_t volume = 0;
    std::vector<std::uint64_t> shell_sizes;
    /// Set when the exploration stopped at a depth cap; only shells up to the cap are exact.
    bool truncated = false;
};

/// Oriented spanning forest of a wired region: every site has one outgoing edge.
class OrientedForest {
public:
    OrientedForest() = default;
    explicit OrientedForest(Region region);

    const Region& region() const { return region_; }
    /// Site identified with the sink (v-wired), if any.
    const std::optional<Point>& wired_vertex() const { return wired_; }

    int parent_dir(const Point& x) const;
    /// Parent site, or nullopt if the parent edge goes to the sink or x is the wired vertex.
    std::optional<Point> parent(const Point& x) const;
    bool to_sink(const Point& x) const;

    /// x, parent(x), ...; ends at the first point outside the region (edge into the
    /// sink) or at the wired vertex.
    LatticePath future(const Point& x) const;
    /// Tree path from x to y, or nullopt when they are joined only through the sink.
    std::optional<LatticePath> tree_path(const Point& x, const Point& y) const;
    /// Sites whose future passes through x, by tree distance from x.
    PastSummary past_summary(const Point& x) const;
    /// Children of x: region sites y with parent(y) = x.
    std::vector<Point> children(const Point& x) const;

    /// Throws ForestError if a site is unset or some future cycles.
    void validate() const;
    /// Lines "x0 x1 x2 x3 -> p0 p1 p2 p3", "-> SINK" or "-> ROOT", in site order.
    void dump(std::ostream& os) const;

    /// Raw per-cell parent directions (0xFF outside the region).
    const std::vector<std::uint8_t>& cells() const { return dir_; }
    std::vector<std::uint8_t>& cells() { return dir_; }
    void set_wired_vertex(const Point& v) { wired_ = v; }

private:
    Region region_;
    std::vector<std::uint8_t> dir_;
    std::optional<Point> wired_;
};

inline constexpr std::uint8_t kOutsideCell = 0xFF;

/// Safety horizon for a single Wilson branch walk.
inline constexpr std::uint64_t kWilsonHorizon = 1'000'000'000ULL;

/// Wilson's algorithm on the wired region; `order` lists the starting sites
/// (default: spiral from the origin). Sites missing from `order` are appended.
OrientedForest wilson_wired(const Region& region, RngStream& rng, const std::vector<Point>* order = nullptr);
/// Same with v identified with the sink; v is the root of its component.
OrientedForest wilson_vwired(const Region& region, const Point& v, RngStream& rng);

/// Exact spanning tree count by Bareiss elimination on the reduced Laplacian.
/// `multiplicity[i][j]` counts edges between vertices i != j.
using BigInt = boost::multiprecision::cpp_int;
BigInt spanning_tree_count(const std::vector<std::vector<int>>& multiplicity, std::size_t max_vertices = 20);
/// Spanning trees of the region with its sink (and v glued to the sink if given).
BigInt spanning_tree_count(const Region& region, const std::optional<Point>& v = std::nullopt,
                           std::size_t max_vertices = 20);

struct LazyPastOptions {
    std::int64_t box_radius = 32;
    /// Stop expanding past vertices at this tree depth (shells up to it stay exact).
    std::uint64_t max_depth = UINT64_MAX;
    /// Abort exploration once the past reaches this many vertices (marked truncated).
    std::uint64_t max_volume = UINT64_MAX;
    /// Abort exploration once the past reaches this lattice distance (marked truncated).
    std::int64_t max_extrinsic = INT64_MAX;
};

/// Past of `origin` in the wired UST of Lambda_R (or the component of origin in
/// the origin-wired UST), built by Wilson's algorithm run only on the sites
/// needed: the future of the origin first, then every neighbour of a discovered
/// past vertex. Sparse storage; cost scales with the past, not the box.
PastSummary lazy_past(const Point& origin, bool origin_wired, RngStream& rng, const LazyPastOptions& opt);

/// Parent directions of `sites` in the wired UST of Lambda_R: Wilson's algorithm
/// started from these sites only, sparse storage. Directions leaving Lambda_R
/// point into the sink.
std::vector<std::uint8_t> wilson_partial(const std::vector<Point>& sites, std::int64_t radius, RngStream& rng);

}  // namespace ust4
