#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "ust4/point.hpp"
#include "ust4/stats.hpp"

namespace ust4 {

using OrbitKey = std::array<std::int64_t, 2 * kDim>;

/// Orbit of the directed edge (x, x + unit(d)) under the signed permutations of
/// the axes, all of which preserve Lambda_R and the wired UST law on it.
inline OrbitKey edge_orbit(const Point& x, int d) {
    std::array<std::pair<std::int64_t, std::int64_t>, kDim> t{};
    const Point v = unit(d);
    for (int i = 0; i < kDim; ++i) {
        std::int64_t s = x[i] != 0 ? v[i] * (x[i] > 0 ? 1 : -1) : std::abs(v[i]);
        t[static_cast<std::size_t>(i)] = {std::abs(x[i]), s};
    }
    std::sort(t.begin(), t.end());
    OrbitKey key{};
    for (std::size_t i = 0; i < t.size(); ++i) {
        key[2 * i] = t[i].first;
        key[2 * i + 1] = t[i].second;
    }
    return key;
}

/// Per-forest fraction of each edge orbit that is a parent edge; forests are
/// the independent unit for the standard errors.
struct OrbitMarginals {
    std::map<OrbitKey, MeanVar> frac;

    template <class Dirs>
    void add(const std::vector<Point>& sites, const Dirs& dirs) {
        std::map<OrbitKey, std::pair<double, double>> f;
        for (std::size_t i = 0; i < sites.size(); ++i)
            for (int d = 0; d < kDegree; ++d) {
                auto& e = f[edge_orbit(sites[i], d)];
                e.second += 1;
                if (static_cast<int>(dirs[i]) == d) e.first += 1;
            }
        for (const auto& [k, e] : f) frac[k].add(e.first / e.second);
    }
};

/// Largest |mean_a - mean_b| / combined stderr over orbits.
inline double max_orbit_z(const OrbitMarginals& a, const OrbitMarginals& b) {
    double worst = 0;
    for (const auto& [k, ma] : a.frac) {
        const auto& mb = b.frac.at(k);
        double se = std::hypot(ma.stderr_(), mb.stderr_());
        if (se > 0) worst = std::max(worst, std::abs(ma.mean() - mb.mean()) / se);
    }
    return worst;
}

}  // namespace ust4
