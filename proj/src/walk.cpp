#include "ust4/walk.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace ust4 {

LatticePath LatticePath::slice(std::size_t a, std::size_t b) const {
    if (a > b || b >= sites.size()) throw std::out_of_range("LatticePath::slice");
    return LatticePath(std::vector<Point>(sites.begin() + static_cast<std::ptrdiff_t>(a),
                                          sites.begin() + static_cast<std::ptrdiff_t>(b) + 1));
}

LatticePath LatticePath::reversed() const { return LatticePath(std::vector<Point>(sites.rbegin(), sites.rend())); }

bool LatticePath::is_nearest_neighbor() const {
    for (std::size_t i = 1; i < sites.size(); ++i)
        if (direction_between(sites[i - 1], sites[i]) < 0) return false;
    return true;
}

bool LatticePath::is_self_avoiding() const {
    std::vector<Point> s = sites;
    std::sort(s.begin(), s.end());
    return std::adjacent_find(s.begin(), s.end()) == s.end();
}

const char* to_string(StopTag t) {
    switch (t) {
        case StopTag::HitTarget: return "HitTarget";
        case StopTag::Escaped: return "Escaped";
        case StopTag::HorizonReached: return "HorizonReached";
        case StopTag::GeometricKill: return "GeometricKill";
    }
    return "?";
}

LatticePath srw(const Point& start, std::uint64_t steps, RngStream& rng) {
    std::vector<Point> s;
    s.reserve(steps + 1);
    s.push_back(start);
    for (std::uint64_t i = 0; i < steps; ++i) s.push_back(step(s.back(), rng.direction()));
    return LatticePath(std::move(s));
}

std::pair<LatticePath, StopOutcome> srw_until(const Point& start, const PointSet& target,
                                              std::int64_t escape_radius, std::uint64_t horizon, RngStream& rng) {
    if (escape_radius <= norm_inf(start)) throw std::invalid_argument("srw_until: start outside escape box");
    if (horizon < 1) throw std::invalid_argument("srw_until: horizon must be >= 1");
    std::vector<Point> s{start};
    Point p = start;
    StopOutcome out;
    if (target.contains(p)) {
        out = {StopTag::HitTarget, 0, p};
        return {LatticePath(std::move(s)), out};
    }
    for (std::uint64_t t = 1; t <= horizon; ++t) {
        int d = rng.direction();
        p = step(p, d);
        s.push_back(p);
        if (target.contains(p)) {
            out = {StopTag::HitTarget, t, p};
            return {LatticePath(std::move(s)), out};
        }
        if (std::abs(p[d >> 1]) > escape_radius) {
            out = {StopTag::Escaped, t, std::nullopt};
            return {LatticePath(std::move(s)), out};
        }
    }
    out = {StopTag::HorizonReached, horizon, std::nullopt};
    return {LatticePath(std::move(s)), out};
}

std::pair<LatticePath, StopOutcome> srw_geometric(const Point& start, double mean_t, RngStream& rng,
                                                  std::optional<std::uint64_t> horizon) {
    if (!(mean_t > 0.0)) throw std::invalid_argument("srw_geometric: mean_t must be positive");
    std::uint64_t cap = horizon.value_or(static_cast<std::uint64_t>(std::ceil(64.0 * mean_t)));
    std::uint64_t T = rng.geometric(1.0 / (mean_t + 1.0));
    StopOutcome out{StopTag::GeometricKill, T, std::nullopt};
    if (T > cap) {
        T = cap;
        out = {StopTag::HorizonReached, cap, std::nullopt};
    }
    return {srw(start, T, rng), out};
}

std::vector<std::size_t> cut_times(const LatticePath& path) {
    std::vector<std::size_t> out;
    const std::size_t n = path.sites.size();
    if (n == 0) return out;
    std::unordered_map<Point, std::size_t, PointHash> last;
    last.reserve(n);
    for (std::size_t i = 0; i < n; ++i) last[path.sites[i]] = i;
    std::size_t reach = 0;
    for (std::size_t t = 0; t < n; ++t) {
        reach = std::max(reach, last[path.sites[t]]);
        if (reach == t) out.push_back(t);
    }
    return out;
}

NoReturnSample srw_no_return(const Point& start, std::uint64_t steps, std::int64_t escape_radius, RngStream& rng,
                             std::uint64_t max_attempts) {
    if (steps < 1) throw std::invalid_argument("srw_no_return: steps must be >= 1");
    std::vector<Point> s;
    for (std::uint64_t a = 1; a <= max_attempts; ++a) {
        s.assign(1, start);
        Point p = start;
        bool ok = true;
        for (std::uint64_t t = 0; t < steps; ++t) {
            int d = rng.direction();
            p = step(p, d);
            s.push_back(p);
            if (p == start) {
                ok = false;
                break;
            }
            if (std::abs(p[d >> 1] - start[d >> 1]) > escape_radius) break;
        }
        if (ok) return {LatticePath(std::move(s)), a};
    }
    throw RejectionBudgetExceeded("srw_no_return: rejection budget exceeded");
}

}  // namespace ust4
