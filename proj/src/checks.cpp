#include "ust4/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "ust4/capacity.hpp"
#include "ust4/experiments.hpp"
#include "ust4/forest.hpp"
#include "ust4/interlace.hpp"
#include "ust4/lerw.hpp"
#include "ust4/orbits.hpp"
#include "ust4/sandpile.hpp"
#include "ust4/stats.hpp"
#include "ust4/walk.hpp"

namespace ust4::checks {

std::vector<Point> first_cycle_removal(std::vector<Point> w) {
    while (true) {
        bool found = false;
        for (std::size_t j = 1; j < w.size() && !found; ++j)
            for (std::size_t i = 0; i < j; ++i)
                if (w[i] == w[j]) {
                    w.erase(w.begin() + static_cast<std::ptrdiff_t>(i) + 1, w.begin() + static_cast<std::ptrdiff_t>(j) + 1);
                    found = true;
                    break;
                }
        if (!found) return w;
    }
}

namespace {

/// Collects detail lines; any failed line fails the criterion.
struct Recorder {
    CheckResult& res;
    void add(bool ok, std::string line) {
        res.details.push_back(fmt::format("{} {}", ok ? "ok  " : "FAIL", line));
        res.pass = res.pass && ok;
    }
};

/// max / min of the values (infinite if some value is not positive).
double band_ratio(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *lo > 0 ? *hi / *lo : INFINITY;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += fmt::format("{}{:.4g}", s.empty() ? "" : " ", x);
    return s;
}

LatticePath random_saw(const Point& start, std::uint64_t len, RngStream& r) {
    while (true) {
        std::vector<Point> s{start};
        for (std::uint64_t i = 0; i < len; ++i) s.push_back(step(s.back(), r.direction()));
        LatticePath p(s);
        if (p.is_self_avoiding()) return p;
    }
}

Point random_point(RngStream& r, std::int64_t radius) {
    Point p;
    for (int i = 0; i < kDim; ++i) p[i] = static_cast<std::int64_t>(r.below(static_cast<std::uint64_t>(2 * radius + 1))) - radius;
    return p;
}

std::vector<Point> random_set(RngStream& r, std::size_t n, std::int64_t radius) {
    std::vector<Point> s;
    while (s.size() < n) {
        s.push_back(random_point(r, radius));
        s = normalize_set(s);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Structural criteria

void loop_erasure_oracle(Recorder& rec, const RunContext& ctx) {
    RngStream r = ctx.task_stream(0);
    std::uint64_t mismatches = 0;
    for (int s = 0; s < 10000; ++s) {
        auto p = srw(kOrigin, r.below(51), r);
        if (loop_erase(p).le_path.sites != first_cycle_removal(p.sites)) ++mismatches;
    }
    rec.add(mismatches == 0, fmt::format("loop_erase vs first-cycle removal: {} mismatches in 10^4 paths of length <= 50", mismatches));
    std::uint64_t violations = 0;
    for (int s = 0; s < 100000; ++s) {
        auto p = srw(kOrigin, r.below(51), r);
        auto le = loop_erase(p);
        bool ok = true;
        for (std::size_t n = 0; n < le.ell.size() && ok; ++n)
            for (std::size_t m = 0; m <= p.length(); ++m)
                if ((le.ell[n] <= m) != (le.rho[m] >= n)) {
                    ok = false;
                    break;
                }
        if (!ok) ++violations;
    }
    rec.add(violations == 0, fmt::format("ell_n <= m iff rho_m >= n: {} violating paths in 10^5", violations));
}

void reversibility(Recorder& rec, const RunContext& ctx) {
    RngStream r = ctx.task_stream(0);
    double worst = 0;
    int vacuous = 0;
    for (int c = 0; c < 20; ++c) {
        auto eta = random_saw(kOrigin, 1 + r.below(3), r);
        std::vector<Point> A;
        const std::uint64_t na = r.below(4);
        while (A.size() < na) {
            Point a = random_point(r, 1);
            if (std::find(eta.sites.begin(), eta.sites.end(), a) == eta.sites.end() &&
                std::find(A.begin(), A.end(), a) == A.end())
                A.push_back(a);
        }
        auto res = check_reversibility(6, eta, A);
        worst = std::max(worst, res.max_deviation);
        if (res.nonzero_terms == 0) ++vacuous;
    }
    rec.add(worst < 1e-12, fmt::format("8^6 enumeration, 20 (eta, A): max deviation {:.3g} (< 1e-12)", worst));
    rec.add(vacuous == 0, fmt::format("cases with no nonzero term: {}", vacuous));
}

void domain_markov(Recorder& rec, const RunContext& ctx) {
    RngStream r = ctx.task_stream(0);
    int within = 0;
    double worst_margin = -INFINITY;
    for (int c = 0; c < 10; ++c) {
        const double mean_t = c % 2 ? 2.0 : 1.0;
        auto omega = random_saw(kOrigin, r.below(3), r);
        LatticePath eta;
        while (true) {
            eta = random_saw(omega.back(), 1 + r.below(2), r);
            std::vector<Point> joined = omega.sites;
            joined.insert(joined.end(), eta.sites.begin() + 1, eta.sites.end());
            if (LatticePath(joined).is_self_avoiding()) break;
        }
        auto res = check_domain_markov(mean_t, omega, eta, 8);
        if (res.deviation <= res.truncation_bound) ++within;
        worst_margin = std::max(worst_margin, res.deviation - res.truncation_bound);
        rec.res.details.push_back(fmt::format("     case {}: |omega| {} |eta| {} t {} lhs {:.6g} rhs {:.6g} deviation {:.3g} bound {:.3g}", c,
                                              omega.length(), eta.length(), mean_t, res.lhs, res.rhs, res.deviation,
                                              res.truncation_bound));
    }
    rec.add(within == 10, fmt::format("deviation <= truncation bound in {}/10 cases (max deviation - bound {:.3g})", within, worst_margin));
}

std::uint64_t tree_key(const OrientedForest& f) {
    std::uint64_t k = 0;
    for (const auto& p : f.region().sites()) k = k * 9 + static_cast<std::uint64_t>(f.parent_dir(p));
    return k;
}

void wilson_uniformity(Recorder& rec, const RunContext& ctx) {
    RngStream r = ctx.task_stream(0);
    const Point e0 = unit(0), e1 = unit(2), e2 = unit(4);
    const std::vector<std::pair<const char*, Region>> graphs{
        {"3-site line", Region::patch({Point{-1, 0, 0, 0}, kOrigin, e0})},
        {"2x2 square", Region::patch({kOrigin, e1, e2, e1 + e2})},
    };
    for (const auto& [name, region] : graphs) {
        const auto count = static_cast<std::uint64_t>(spanning_tree_count(region));
        std::map<std::uint64_t, double> freq;
        const int samples = 100000;
        for (int i = 0; i < samples; ++i) freq[tree_key(wilson_wired(region, r))] += 1;
        const double e = static_cast<double>(samples) / static_cast<double>(count);
        double stat = 0;
        for (const auto& [k, o] : freq) stat += (o - e) * (o - e) / e;
        stat += static_cast<double>(count - std::min<std::uint64_t>(count, freq.size())) * e;
        const double p = chi_square_sf(stat, static_cast<double>(count - 1));
        rec.add(p > 0.01 && freq.size() <= count,
                fmt::format("{}: {} trees (matrix-tree), {} seen, chi-square p {:.4f} (> 0.01)", name, count, freq.size(), p));
    }
}

void sandpile_exact(Recorder& rec, const RunContext& ctx) {
    RngStream r = ctx.task_stream(0);
    auto box = Region::box(3);
    int abelian = 0;
    for (int trial = 0; trial < 100; ++trial) {
        SandpileConfig c(box);
        std::vector<std::int32_t> h(box.size());
        for (auto& v : h) v = static_cast<std::int32_t>(r.below(21));
        c.set_heights(h);
        auto a = stabilize(c, Schedule::Fifo);
        auto b = stabilize(c, Schedule::Random, &r);
        if (a.config == b.config && a.odometer == b.odometer) ++abelian;
    }
    rec.add(abelian == 100, fmt::format("FIFO and random schedules agree (config and odometer) on {}/100 instances", abelian));

    const Point e1 = unit(2), e2 = unit(4);
    auto patch = Region::patch({kOrigin, e1, e2, e1 + e2});
    const auto trees = spanning_tree_count(patch);
    std::uint64_t recurrent = 0;
    std::set<std::vector<std::uint8_t>> images;
    std::vector<std::int32_t> h(4);
    for (int code = 0; code < 4096; ++code) {
        for (std::size_t i = 0; i < 4; ++i) h[i] = (code >> (3 * i)) & 7;
        SandpileConfig c(patch);
        c.set_heights(h);
        if (!is_recurrent(c)) continue;
        ++recurrent;
        auto f = recurrent_to_tree(c);
        std::vector<std::uint8_t> dirs;
        for (const auto& p : patch.sites()) dirs.push_back(static_cast<std::uint8_t>(f.parent_dir(p)));
        images.insert(dirs);
    }
    rec.add(BigInt(recurrent) == trees && images.size() == recurrent,
            fmt::format("2x2 patch: {} recurrent configs, {} spanning trees, {} distinct images", recurrent,
                        trees.str(), images.size()));

    auto box6 = Region::box(6);
    int round_trips = 0;
    for (int i = 0; i < 1000; ++i) {
        auto f = wilson_wired(box6, r);
        auto c = tree_to_recurrent(f);
        if (c.is_stable() && is_recurrent(c) && recurrent_to_tree(c).cells() == f.cells()) ++round_trips;
    }
    rec.add(round_trips == 1000, fmt::format("burning bijection round trip on {}/1000 Wilson samples (box radius 6)", round_trips));
}

void interlacement(Recorder& rec, const RunContext& ctx) {
    RngStream r = ctx.task_stream(0);
    {
        const auto K = Region::box(1).sites();
        RngStream rc = ctx.task_stream(1);
        const auto cap = capacity(K, CapMethod::Exact, rc);
        InterlacementOptions o;
        o.r_traj = 8;
        const double lambda = 5.0, dt = lambda / cap.value;
        const int windows = 10000, bins = 20;
        std::vector<double> obs(bins, 0.0), expected(bins);
        for (int i = 0; i < windows; ++i) {
            auto w = sample_interlacement(K, 0.0, dt, cap, r, o);
            obs[std::min<std::size_t>(w.trajectories.size(), bins - 1)] += 1;
        }
        double tail = 1.0;
        for (int k = 0; k < bins - 1; ++k) {
            expected[static_cast<std::size_t>(k)] = windows * std::exp(-lambda + k * std::log(lambda) - std::lgamma(k + 1.0));
            tail -= expected[static_cast<std::size_t>(k)] / windows;
        }
        expected[bins - 1] = windows * tail;
        const double p = chi_square_test(obs, expected).p_value;
        rec.add(p > 0.01, fmt::format("K = Lambda_1 (cap {:.3f}): trajectory counts vs Poisson(5), 10^4 windows, chi-square p {:.4f} (> 0.01)",
                                      cap.value, p));
    }

    const auto K = Region::box(2).sites();
    const std::int64_t R = 16;
    InterlacementOptions o;
    o.r_traj = R;
    RngStream rc = ctx.task_stream(2);
    CapacityOptions co;
    co.r_esc = R;
    co.site_draws = 20000;
    const auto cap = capacity(K, CapMethod::MC, rc, co);
    int holds = 0, skipped = 0, fails = 0;
    while (holds + fails < 1000) {
        auto w = sample_interlacement(K, 0.0, 10.0, cap, r, o);
        for (int k = 0; k < 100 && holds + fails < 1000; ++k) {
            const double s = 10.0 * r.uniform(), t = s + 0.2 * r.uniform() + 1e-9;
            switch (past_dynamics_check(w, s, t, K[r.below(K.size())])) {
                case PastDynamics::Holds: ++holds; break;
                case PastDynamics::Skipped: ++skipped; break;
                case PastDynamics::Fails: ++fails; break;
            }
        }
    }
    rec.add(fails == 0, fmt::format("past dynamics on Lambda_2: holds {}, fails {} ({} triples with v re-hit skipped)", holds, fails, skipped));

    OrbitMarginals ab, wil;
    const int forests = 2000;
    for (int i = 0; i < forests; ++i) {
        auto w = sample_interlacement(K, 0.0, 0.0, cap, r, o);
        extend_until_covered(w, 0.0, r, o);
        auto f = aldous_broder_window(w, 0.0);
        ab.add(f.K, f.parent_dir);
        wil.add(K, wilson_partial(K, R, r));
    }
    const double z = max_orbit_z(ab, wil);
    rec.add(z < 3.0, fmt::format("AB vs Wilson edge marginals on Lambda_2 (killing radius {}, {} forests each, {} edge orbits): max |z| {:.2f} (< 3)",
                                 R, forests, ab.frac.size(), z));
}

void capacity_decomposition(Recorder& rec, const RunContext& ctx) {
    RngStream r = ctx.task_stream(0);
    int within = 0;
    double worst = 0;
    for (int c = 0; c < 100; ++c) {
        auto A = random_set(r, 2 + r.below(5), 2), B = random_set(r, 2 + r.below(5), 2);
        auto d = decomposition_check(A, B, {}, 1e-3);
        if (d.within_bounds) ++within;
        worst = std::max({worst, -d.epsilon, d.epsilon - d.cap_intersection});
    }
    rec.add(within == 100, fmt::format("0 <= epsilon <= cap(A n B) within 1e-3 (exact backend) on {}/100 pairs; worst excess {:.3g}", within, worst));

    // Family-wise 1% over 3000 one-sided comparisons: z = 4.5.
    const double z = 4.5;
    int mono = 0, sub = 0, lower = 0;
    CapacityOptions o;
    o.r_esc = 8;
    o.samples_per_site = 1000;
    for (int c = 0; c < 1000; ++c) {
        auto A = random_set(r, 2 + r.below(4), 3), B = random_set(r, 2 + r.below(4), 3);
        auto U = set_union(A, B);
        auto ca = capacity(A, CapMethod::MC, r, o), cb = capacity(B, CapMethod::MC, r, o), cu = capacity(U, CapMethod::MC, r, o);
        auto xab = chi_tilde(A, B, CapMethod::MC, r, o), xba = chi_tilde(B, A, CapMethod::MC, r, o);
        const double big = std::max(ca.value, cb.value), big_se = ca.value >= cb.value ? ca.stderr_ : cb.stderr_;
        if (cu.value >= big - z * std::hypot(cu.stderr_, big_se)) ++mono;
        if (cu.value <= ca.value + cb.value + z * std::hypot(cu.stderr_, ca.stderr_, cb.stderr_)) ++sub;
        const double se = std::sqrt(cu.stderr_ * cu.stderr_ + ca.stderr_ * ca.stderr_ + cb.stderr_ * cb.stderr_ +
                                    xab.stderr_ * xab.stderr_ + xba.stderr_ * xba.stderr_);
        if (cu.value >= ca.value + cb.value - xab.value - xba.value - z * se) ++lower;
    }
    rec.add(mono == 1000, fmt::format("monotonicity cap(A u B) >= max(cap A, cap B) within {} combined stderr: {}/1000", z, mono));
    rec.add(sub == 1000, fmt::format("subadditivity cap(A u B) <= cap A + cap B within {} combined stderr: {}/1000", z, sub));
    rec.add(lower == 1000, fmt::format("lower bound cap(A u B) >= cap A + cap B - chi(A,B) - chi(B,A) within {} combined stderr: {}/1000", z, lower));
}

// ---------------------------------------------------------------------------
// Desk-scale criteria

void capacity_band(Recorder& rec, const RunContext& ctx) {
    CapacityScalingOptions o;
    o.grid.clear();
    for (std::uint64_t n = 1 << 10; n <= (1 << 16); n *= 2) o.grid.push_back(n);
    auto rows = capacity_scaling(o, ctx);
    std::vector<double> norm;
    double min_ratio = INFINITY, min_mean = INFINITY;
    for (const auto& row : rows) {
        norm.push_back(row.walk_normalized.mean());
        min_ratio = std::min(min_ratio, row.min_ratio);
        min_mean = std::min(min_mean, row.ratio.mean());
    }
    const double band = band_ratio(norm);
    rec.add(band <= 1.5, fmt::format("E cap(X^n) ln n / n over n = 2^10..2^16 ({} walks, {} site draws each): [{}], max/min {:.3f} (<= 1.5)",
                                     o.samples, o.site_draws, join(norm), band));
    rec.add(min_ratio >= 1.0 / 256, fmt::format("min sample cap(LE)/cap(X) {:.4f} (>= 1/256)", min_ratio));
    rec.add(min_mean >= 0.2, fmt::format("min over n of mean cap(LE)/cap(X) {:.4f} (>= 0.2)", min_mean));
}

void lerw_growth(Recorder& rec, const RunContext& ctx) {
    LerwScalingOptions o;
    o.grid = {1000000};
    o.samples = 10000;
    o.horizon_factor = 2.0;
    auto row = lerw_scaling(o, ctx).at(0);
    const double m = row.ratio.mean();
    rec.add(m >= 0.8 && m <= 1.3, fmt::format("mean rho_n / (n (ln n)^(-1/3)) at n = 10^6, {} samples, horizon 2n: {:.4f} +- {:.4f} (in [0.8, 1.3]); q10 {:.3f} q50 {:.3f} q90 {:.3f}",
                                             row.ratio.count(), m, row.ratio.stderr_(), row.q10, row.q50, row.q90));
    rec.add(row.rho_at_most_n, "rho_n <= n on every sample");
}

void nonintersection_band(Recorder& rec, const RunContext& ctx) {
    NonintersectionOptions o;
    auto rows = nonintersection(o, ctx);
    std::vector<double> scaled;
    for (const auto& row : rows) scaled.push_back(row.extrapolated * std::cbrt(std::log(static_cast<double>(row.n))));
    const double band = band_ratio(scaled);
    rec.add(band <= 2.0, fmt::format("p(non-intersection) (ln n)^(1/3) over n = 2^8..2^16 ({} samples): [{}], max/min {:.3f} (<= 2)",
                                     o.samples, join(scaled), band));
    auto moments = conditional_moment(2, o, ctx);
    std::vector<double> m2;
    for (const auto& row : moments) m2.push_back(row.moment.mean() * std::pow(std::log(static_cast<double>(row.n)), 2.0 / 3.0));
    const double band2 = band_ratio(m2);
    rec.add(band2 <= 2.0, fmt::format("p = 2 conditional moment (ln n)^(2/3): [{}], max/min {:.3f} (<= 2)", join(m2), band2));
}

void ball_growth(Recorder& rec, const RunContext& ctx) {
    BallVolumeOptions o;
    o.model = PastModel::UstPast;
    o.max_depth = 20;
    o.box_radius = 80;
    o.samples = 10000;
    auto rows = ball_volumes(o, ctx);
    double worst = 0;
    for (std::size_t n = 1; n < rows.size(); ++n) {
        const auto& s = rows[n].shell;
        worst = std::max(worst, std::abs(s.mean() - 1) / s.stderr_());
    }
    rec.add(worst <= 3, fmt::format("E|boundary P(0,n)| = 1 for n = 1..20 (box 80, {} forests): max |mean - 1| / stderr {:.2f} (<= 3)",
                                    o.samples, worst));

    BallVolumeOptions z;
    z.model = PastModel::ZeroWired;
    const auto grid = ball_grid();
    z.max_depth = static_cast<std::uint64_t>(grid.back());
    z.box_radius = box_radius_policy(grid.back());
    z.samples = 10000;
    auto zrows = ball_volumes(z, ctx);
    std::vector<double> y;
    for (double n : grid) y.push_back(zrows[static_cast<std::size_t>(n)].ball.mean());
    auto fit = polylog_fit(grid, y, -1.0);
    std::vector<double> per_n;
    for (std::size_t i = 0; i < grid.size(); ++i) per_n.push_back(y[i] / grid[i]);
    rec.add(fit.a >= 0.15 && fit.a <= 0.6,
            fmt::format("0-wired E|P_0(0,n)|/n over n = 16..512 (box {}, {} samples): [{}], polylog exponent {:.3f} (in [0.15, 0.6])",
                        z.box_radius, z.samples, join(per_n), fit.a));
}

void one_arm_fit(Recorder& rec, const RunContext& ctx) {
    PastTailOptions o;
    o.samples = 100000;
    o.model = PastModel::UstPast;
    auto ust = one_arm(o, ctx);
    o.model = PastModel::ZeroWired;
    auto zw = one_arm(o, ctx);
    std::vector<double> scaled;
    for (const auto& p : ust.curve.points) scaled.push_back(p.n * p.p_hat);
    rec.add(ust.fit.a >= 0.1 && ust.fit.a <= 0.7,
            fmt::format("UST past: n P(rad_int >= n) over n = 16..256 ({} forests per box radius): [{}], polylog exponent {:.3f} on {} points (in [0.1, 0.7])",
                        o.samples, join(scaled), ust.fit.a, ust.fit.points));
    int below = 0;
    for (std::size_t i = 0; i < ust.curve.points.size(); ++i)
        if (zw.curve.points[i].ci.hi < ust.curve.points[i].ci.lo) ++below;
    std::vector<double> zs;
    for (const auto& p : zw.curve.points) zs.push_back(p.n * p.p_hat);
    rec.add(below == 0, fmt::format("0-wired n P(rad_int >= n): [{}]; points below the UST curve beyond CI: {}", join(zs), below));
}

void volume_fit(Recorder& rec, const RunContext& ctx) {
    PastTailOptions o;
    o.samples = 100000;
    auto res = volume_tail(o, ctx);
    std::vector<double> scaled;
    for (const auto& p : res.curve.points) scaled.push_back(std::sqrt(p.n) * p.p_hat);
    rec.add(res.fit.a >= 0.05 && res.fit.a <= 0.4,
            fmt::format("n^(1/2) P(|P| >= n) over n = 16..4096 ({} forests per box radius): [{}], polylog exponent {:.3f} (in [0.05, 0.4])",
                        o.samples, join(scaled), res.fit.a));
    int decreases = 0;
    const auto& pts = res.curve.points;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            if (!pts[i].flagged && !pts[j].flagged && std::sqrt(pts[j].n) * pts[j].ci.hi < std::sqrt(pts[i].n) * pts[i].ci.lo)
                ++decreases;
    rec.add(decreases == 0, fmt::format("non-decreasing within CI: {} decreasing pairs", decreases));
}

void box_intersections(Recorder& rec, const RunContext& ctx) {
    BoxIntersectionOptions o;
    o.samples = 2000;
    auto rows = box_intersection(o, ctx);
    std::vector<double> i1, i2, hit;
    for (const auto& row : rows) {
        const double lr = std::log(static_cast<double>(row.r));
        i1.push_back(row.i_r.mean());
        i2.push_back(row.i_r_sq.mean() / lr);
        hit.push_back(row.hit.p_hat * lr);
    }
    const double b1 = band_ratio(i1), b2 = band_ratio(i2), b3 = band_ratio(hit);
    rec.add(b1 <= 2, fmt::format("E I_r over r = 16..512 ({} samples, walks killed at {} r): [{}], max/min {:.3f} (<= 2)", o.samples,
                                 o.truncation, join(i1), b1));
    rec.add(b2 <= 2, fmt::format("E I_r^2 / ln r: [{}], max/min {:.3f} (<= 2)", join(i2), b2));
    rec.add(b3 <= 2, fmt::format("P(hit) ln r: [{}], max/min {:.3f} (<= 2)", join(hit), b3));

    UstBoxCountOptions u;
    auto counts = ust_box_count(u, ctx);
    std::vector<double> c;
    for (const auto& row : counts) c.push_back(row.normalized);
    const double b4 = band_ratio(c);
    rec.add(b4 <= 2, fmt::format("E|{{x : tree path 0 -> x in Lambda_r}}| ln r / r^4 over r = 4, 8, 16 (wired box {} r, {} trees): [{}], max/min {:.3f} (<= 2)",
                                 u.box_factor, u.samples, join(c), b4));
}

void avalanche_band(Recorder& rec, const RunContext& ctx) {
    AvalancheTailOptions o;
    o.samples = 100000;
    auto res = avalanche_tails(o, ctx);
    const auto& pts = res.cluster.points;
    const double v16 = std::sqrt(pts.at(0).n) * pts.at(0).p_hat;
    const double c = v16 / 2, C = 2 * v16 / std::sqrt(std::log(pts.at(0).n));
    int outside = 0, used = 0;
    std::vector<double> scaled;
    for (const auto& p : pts) {
        const double v = std::sqrt(p.n) * p.p_hat;
        scaled.push_back(v);
        if (p.flagged) continue;
        ++used;
        if (v < c || v > C * std::sqrt(std::log(p.n))) ++outside;
    }
    rec.add(outside == 0 && used >= 2,
            fmt::format("n^(1/2) P(|AvC| >= n) (box {}, {} avalanches, {} empty): [{}]; band [{:.4g}, {:.4g} (ln n)^(1/2)] from n = 16; {} of {} unflagged points outside",
                        o.box_radius, o.samples, res.empty, join(scaled), c, C, outside, used));
    rec.add(res.multiset_dominates, "|Av| >= |AvC| on every sample");
}

void fit_power(Recorder& rec, const RunContext& ctx) {
    auto rows = fit_calibration({}, ctx);
    int bad = 0;
    for (const auto& row : rows) {
        const bool ok = std::abs(row.a_exact - row.a_true) <= 0.05 && std::abs(row.a_median - row.a_true) <= 0.05;
        if (!ok) ++bad;
        rec.res.details.push_back(fmt::format("     {} b {} a {:.4f}: exact fit {:.4f}, noisy median {:.4f} [q10 {:.4f}, q90 {:.4f}] over {} replicates",
                                              row.grid_name, row.b, row.a_true, row.a_exact, row.a_median, row.a_q10, row.a_q90,
                                              row.replicates));
    }
    rec.add(bad == 0, fmt::format("fitted exponent within 0.05 of the truth (exact and noisy median): {} of {} failing", bad, rows.size()));
}

using CheckFn = void (*)(Recorder&, const RunContext&);

struct Entry {
    CheckInfo info;
    CheckFn fn;
};

const std::vector<Entry>& entries() {
    static const std::vector<Entry> e{
        {{1, "loop-erasure oracle and ell/rho duality", true}, loop_erasure_oracle},
        {{2, "LERW reversibility by exhaustive enumeration", true}, reversibility},
        {{3, "domain Markov property by truncated enumeration", true}, domain_markov},
        {{4, "Wilson uniformity vs matrix-tree counts", true}, wilson_uniformity},
        {{5, "sandpile abelian property and burning bijection", true}, sandpile_exact},
        {{6, "interlacement counts, past dynamics, AB marginals", true}, interlacement},
        {{7, "capacity decomposition and inequalities", true}, capacity_decomposition},
        {{8, "capacity of walks and loop-erasures", false}, capacity_band},
        {{9, "loop-erasure growth rho_n", false}, lerw_growth},
        {{10, "non-intersection and conditional moment bands", false}, nonintersection_band},
        {{11, "ball volumes of the past", false}, ball_growth},
        {{12, "one-arm tail and 0-wired domination", false}, one_arm_fit},
        {{13, "past volume tail", false}, volume_fit},
        {{14, "box intersections", false}, box_intersections},
        {{15, "avalanche cluster tail", false}, avalanche_band},
        {{16, "polylog fit calibration", false}, fit_power},
    };
    return e;
}

}  // namespace

const std::vector<CheckInfo>& catalogue() {
    static const std::vector<CheckInfo> c = [] {
        std::vector<CheckInfo> v;
        for (const auto& e : entries()) v.push_back(e.info);
        return v;
    }();
    return c;
}

CheckResult run(int id, std::uint64_t seed, unsigned workers) {
    const auto& all = entries();
    auto it = std::find_if(all.begin(), all.end(), [&](const Entry& e) { return e.info.id == id; });
    if (it == all.end()) throw std::out_of_range(fmt::format("no acceptance criterion {}", id));
    CheckResult res;
    res.id = id;
    res.title = it->info.title;
    res.pass = true;
    Recorder rec{res};
    RunContext ctx(hash64(seed, static_cast<std::uint64_t>(id)), workers);
    const auto t0 = std::chrono::steady_clock::now();
    it->fn(rec, ctx);
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

}  // namespace ust4::checks
