#include "ust4/interlace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "ust4/flat_map.hpp"

namespace ust4 {

std::int64_t default_trajectory_radius(const std::vector<Point>& K) {
    std::int64_t diam = 0;
    for (int i = 0; i < kDim; ++i) {
        std::int64_t lo = INT64_MAX, hi = INT64_MIN;
        for (const auto& p : K) {
            lo = std::min(lo, p[i]);
            hi = std::max(hi, p[i]);
        }
        if (!K.empty()) diam = std::max(diam, hi - lo);
    }
    return 8 * diam + 64;
}

namespace {

struct Walker {
    std::array<std::int64_t, kDim> c{};
    std::uint64_t key = 0;
    std::int64_t R = 0;
    std::int64_t k_extent = 0;

    Walker(const Point& p, std::int64_t radius, std::int64_t extent)
        : c{p[0], p[1], p[2], p[3]}, key(pack(p)), R(radius), k_extent(extent) {}

    /// Takes a step; returns false once the walk has left Lambda_R.
    bool step(int d) {
        key = pack_step(key, d);
        std::int64_t& cc = c[static_cast<std::size_t>(d >> 1)];
        cc += (d & 1) ? -1 : 1;
        return std::abs(cc) <= R;
    }
    bool near_k() const {
        return std::abs(c[0]) <= k_extent && std::abs(c[1]) <= k_extent && std::abs(c[2]) <= k_extent &&
               std::abs(c[3]) <= k_extent;
    }
    Point point() const { return Point{c[0], c[1], c[2], c[3]}; }
};

std::int64_t extent_of(const std::vector<Point>& K) {
    std::int64_t e = 0;
    for (const auto& p : K) e = std::max(e, norm_inf(p));
    return e;
}

}  // namespace

Trajectory sample_trajectory(const std::vector<Point>& K, const PointSet& Kset, std::int64_t R, RngStream& rng,
                             const InterlacementOptions& opt) {
    const std::int64_t extent = extent_of(K);
    if (extent > R) throw std::invalid_argument("sample_trajectory: K not inside the killing box");
    Trajectory tr;
    Point before_entry{};
    std::vector<Point> back;
    for (std::uint64_t attempt = 0;; ++attempt) {
        if (attempt >= opt.max_attempts) throw RejectionBudgetExceeded("sample_trajectory: rejection budget exceeded");
        const Point& u = K[rng.below(K.size())];
        Walker w(u, R, extent);
        back.clear();
        if (opt.keep_paths) back.push_back(u);
        bool escaped = false, first = true;
        while (true) {
            bool inside = w.step(rng.direction());
            if (first) {
                before_entry = w.point();
                first = false;
            }
            if (opt.keep_paths) back.push_back(w.point());
            if (!inside) {
                escaped = true;
                break;
            }
            if (w.near_k() && Kset.contains_key(w.key)) break;
        }
        if (escaped) {
            tr.entry = u;
            break;
        }
        ++tr.rejections;
    }
    tr.backward = LatticePath(std::move(back));
    tr.visits.push_back({tr.entry, before_entry});

    FlatMap<char> seen(16);
    seen[pack(tr.entry)] = 1;
    std::vector<Point> fwd;
    if (opt.keep_paths) fwd.push_back(tr.entry);
    Walker w(tr.entry, R, extent);
    Point prev = tr.entry;
    while (true) {
        bool inside = w.step(rng.direction());
        if (opt.keep_paths) fwd.push_back(w.point());
        if (!inside) break;
        if (w.near_k() && Kset.contains_key(w.key) && !seen.contains(w.key)) {
            seen[w.key] = 1;
            tr.visits.push_back({w.point(), prev});
        }
        prev = w.point();
    }
    tr.forward = LatticePath(std::move(fwd));
    return tr;
}

WindowInterlacement sample_interlacement(const std::vector<Point>& K_in, double t0, double t1,
                                         const CapacityEstimate& cap_est, RngStream& rng,
                                         const InterlacementOptions& opt) {
    if (!(t1 >= t0)) throw std::invalid_argument("sample_interlacement: t1 < t0");
    if (K_in.empty()) throw std::invalid_argument("sample_interlacement: empty K");
    if (!(cap_est.value > 0)) throw std::invalid_argument("sample_interlacement: capacity must be positive");
    WindowInterlacement w;
    w.K = normalize_set(K_in);
    w.t0 = t0;
    w.t1 = t1;
    w.r_traj = opt.r_traj > 0 ? opt.r_traj : default_trajectory_radius(w.K);
    w.rate = cap_est.value;
    PointSet Kset(w.K.begin(), w.K.end());
    const std::uint64_t n = rng.poisson((t1 - t0) * w.rate);
    std::vector<double> arrivals(n);
    for (auto& a : arrivals) a = t0 + (t1 - t0) * rng.uniform();
    std::sort(arrivals.begin(), arrivals.end());
    w.trajectories.reserve(n);
    for (double a : arrivals) {
        w.trajectories.push_back(sample_trajectory(w.K, Kset, w.r_traj, rng, opt));
        w.trajectories.back().arrival_time = a;
    }
    return w;
}

void extend_until_covered(WindowInterlacement& w, double t, RngStream& rng, const InterlacementOptions& opt) {
    PointSet Kset(w.K.begin(), w.K.end());
    FlatMap<char> covered(2 * w.K.size() + 16);
    for (const auto& tr : w.trajectories)
        if (tr.arrival_time >= t)
            for (const auto& v : tr.visits) covered[pack(v.site)] = 1;
    InterlacementOptions o = opt;
    o.r_traj = w.r_traj;
    double now = std::max(w.t1, t);
    while (covered.size() < w.K.size()) {
        now += rng.exponential(w.rate);
        auto tr = sample_trajectory(w.K, Kset, w.r_traj, rng, o);
        tr.arrival_time = now;
        for (const auto& v : tr.visits) covered[pack(v.site)] = 1;
        w.trajectories.push_back(std::move(tr));
    }
    w.t1 = std::max(w.t1, now);
}

ABForest aldous_broder_window(const WindowInterlacement& w, double t) {
    ABForest f;
    f.K = w.K;
    f.parent_dir.assign(w.K.size(), -1);
    f.source.assign(w.K.size(), -1);
    FlatMap<std::uint32_t> index(2 * w.K.size() + 16);
    for (std::size_t i = 0; i < w.K.size(); ++i) index[pack(w.K[i])] = static_cast<std::uint32_t>(i);
    std::size_t left = w.K.size();
    for (std::size_t j = 0; j < w.trajectories.size() && left > 0; ++j) {
        const auto& tr = w.trajectories[j];
        if (tr.arrival_time < t) continue;
        for (const auto& v : tr.visits) {
            std::uint32_t i = *index.find(pack(v.site));
            if (f.parent_dir[i] >= 0) continue;
            f.parent_dir[i] = direction_between(v.site, v.previous);
            f.source[i] = static_cast<std::int64_t>(j);
            --left;
        }
    }
    for (std::size_t i = 0; i < w.K.size(); ++i)
        if (f.parent_dir[i] < 0) f.uncovered.push_back(w.K[i]);
    return f;
}

std::vector<Point> restricted_past(const ABForest& f, const Point& v) {
    FlatMap<std::uint32_t> index(2 * f.K.size() + 16);
    for (std::size_t i = 0; i < f.K.size(); ++i) index[pack(f.K[i])] = static_cast<std::uint32_t>(i);
    if (!index.contains(pack(v))) throw std::invalid_argument("restricted_past: v not in K");
    std::vector<Point> out{v}, stack{v};
    while (!stack.empty()) {
        Point x = stack.back();
        stack.pop_back();
        for (int d = 0; d < kDegree; ++d) {
            Point y = step(x, d);
            const auto* i = index.find(pack(y));
            if (i && f.parent_dir[*i] == opposite(d)) {
                out.push_back(y);
                stack.push_back(y);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

PastDynamics past_dynamics_check(const WindowInterlacement& w, double s, double t, const Point& v) {
    if (!(s < t)) throw std::invalid_argument("past_dynamics_check: need s < t");
    PointSet hit;
    for (const auto& tr : w.trajectories)
        if (tr.arrival_time >= s && tr.arrival_time < t)
            for (const auto& x : tr.visits) hit.insert(x.site);
    if (hit.contains(v)) return PastDynamics::Skipped;
    auto at_s = restricted_past(aldous_broder_window(w, s), v);
    auto ft = aldous_broder_window(w, t);
    // Component of v in the past at t after deleting the sites hit during [s, t).
    FlatMap<std::uint32_t> index(2 * w.K.size() + 16);
    for (std::size_t i = 0; i < w.K.size(); ++i) index[pack(w.K[i])] = static_cast<std::uint32_t>(i);
    std::vector<Point> comp{v}, stack{v};
    while (!stack.empty()) {
        Point x = stack.back();
        stack.pop_back();
        for (int d = 0; d < kDegree; ++d) {
            Point y = step(x, d);
            const auto* i = index.find(pack(y));
            if (i && ft.parent_dir[*i] == opposite(d) && !hit.contains(y)) {
                comp.push_back(y);
                stack.push_back(y);
            }
        }
    }
    std::sort(comp.begin(), comp.end());
    return comp == at_s ? PastDynamics::Holds : PastDynamics::Fails;
}

}  // namespace ust4
