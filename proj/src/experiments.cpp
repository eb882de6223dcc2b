#include "ust4/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

#include "ust4/capacity.hpp"
#include "ust4/flat_map.hpp"
#include "ust4/forest.hpp"
#include "ust4/lerw.hpp"
#include "ust4/sandpile.hpp"
#include "ust4/walk.hpp"

namespace ust4 {

// ---------------------------------------------------------------------------
// Tail curves and fits

void TailCurve::add_point(double n, std::uint64_t successes, std::uint64_t samples, std::int64_t radius) {
    TailPoint p;
    p.n = n;
    p.successes = successes;
    p.samples = samples;
    p.p_hat = samples ? static_cast<double>(successes) / static_cast<double>(samples) : 0.0;
    p.ci = wilson_score(successes, samples);
    p.flagged = successes < kMinSuccesses;
    p.radius = radius;
    points.push_back(p);
}

TailCurve TailCurve::from_values(std::string quantity, const std::vector<double>& values,
                                 const std::vector<double>& grid, std::int64_t radius) {
    TailCurve c;
    c.quantity = std::move(quantity);
    for (double n : grid) {
        std::uint64_t k = 0;
        for (double v : values)
            if (v >= n) ++k;
        c.add_point(n, k, values.size(), radius);
    }
    return c;
}

bool TailCurve::monotone_within_ci() const {
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            if (points[j].ci.lo > points[i].ci.hi) return false;
    return true;
}

PolylogFit polylog_fit(const std::vector<double>& n, const std::vector<double>& y, double b,
                       const std::vector<double>& weights) {
    if (n.size() != y.size() || n.size() < 2) throw std::invalid_argument("polylog_fit: need >= 2 points");
    std::vector<double> x, z;
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (!(n[i] > 1) || !(y[i] > 0)) throw std::invalid_argument("polylog_fit: need n > 1 and y > 0");
        x.push_back(std::log(std::log(n[i])));
        z.push_back(std::log(y[i]) + b * std::log(n[i]));
    }
    auto lf = linear_fit(x, z, weights);
    PolylogFit f;
    f.b = b;
    f.a = lf.slope;
    f.intercept = lf.intercept;
    f.r2 = lf.r2;
    f.residuals = lf.residuals;
    f.points = n.size();
    return f;
}

PolylogFit polylog_fit(const TailCurve& curve, double b) {
    std::vector<double> n, y, w;
    for (const auto& p : curve.points) {
        if (p.flagged || p.successes == 0 || !(p.n > 1)) continue;
        n.push_back(p.n);
        y.push_back(p.p_hat);
        w.push_back(static_cast<double>(p.successes) / std::max(1e-12, 1 - p.p_hat));
    }
    if (n.size() < 2) {
        PolylogFit f;
        f.b = b;
        f.a = std::nan("");
        f.points = n.size();
        return f;
    }
    return polylog_fit(n, y, b, w);
}

std::int64_t box_radius_policy(double n, double scale) {
    const double ln = n > 1 ? std::log(n) : 0.0;
    const auto r = static_cast<std::int64_t>(4 * std::ceil(std::sqrt(n * std::cbrt(ln))));
    return static_cast<std::int64_t>(std::llround(scale * static_cast<double>(std::max<std::int64_t>(32, r))));
}

namespace {

std::vector<double> dyadic(double lo, double hi) {
    std::vector<double> g;
    for (double n = lo; n <= hi; n *= 2) g.push_back(n);
    return g;
}

}  // namespace

std::vector<double> one_arm_grid() { return dyadic(16, 256); }
std::vector<double> volume_grid() { return dyadic(16, 4096); }
std::vector<double> extrinsic_grid() { return dyadic(4, 32); }
std::vector<double> ball_grid() { return dyadic(16, 512); }

const char* to_string(PastModel m) { return m == PastModel::UstPast ? "ust-past" : "zero-wired"; }

namespace {

double quantile(std::vector<double> v, double q) {
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::int64_t diameter_inf(const std::vector<Point>& A) {
    std::int64_t d = 0;
    for (int i = 0; i < kDim; ++i) {
        std::int64_t lo = INT64_MAX, hi = INT64_MIN;
        for (const auto& p : A) {
            lo = std::min(lo, p[i]);
            hi = std::max(hi, p[i]);
        }
        if (!A.empty()) d = std::max(d, hi - lo);
    }
    return d;
}

std::int64_t extent_inf(const std::vector<Point>& A) {
    std::int64_t e = 0;
    for (const auto& p : A) e = std::max(e, norm_inf(p));
    return e;
}

/// MC capacity with escape radius tied to the set's size; the two-radius
/// extrapolation in `capacity` removes the leading 1/R^2 bias.
double walk_set_capacity(const std::vector<Point>& A, std::uint64_t draws, RngStream& rng) {
    CapacityOptions o;
    o.site_draws = draws;
    o.r_esc = std::max<std::int64_t>(16, diameter_inf(A));
    return capacity(A, CapMethod::MC, rng, o).value;
}

struct TwoRadius {
    bool small = true, large = true;
};

/// Walk from the origin for times >= 1 until it leaves Lambda_{2R}; reports
/// whether it avoided `set` before leaving Lambda_R and Lambda_2R.
TwoRadius avoid_walk(const PointSet& set, std::int64_t extent, std::int64_t R, RngStream& rng) {
    std::array<std::int64_t, kDim> c{};
    bool beyond_small = false;
    while (true) {
        const int d = rng.direction();
        std::int64_t& cc = c[static_cast<std::size_t>(d >> 1)];
        cc += (d & 1) ? -1 : 1;
        const std::int64_t m =
            std::max(std::max(std::abs(c[0]), std::abs(c[1])), std::max(std::abs(c[2]), std::abs(c[3])));
        if (m > R) beyond_small = true;
        if (m > 2 * R) return {true, true};
        if (m <= extent && set.contains(Point{c[0], c[1], c[2], c[3]})) return {beyond_small, false};
    }
}

struct LoopErasedTarget {
    PointSet set;
    std::int64_t extent = 0;
    std::int64_t radius = 0;
};

LoopErasedTarget loop_erased_target(std::uint64_t n, double factor, RngStream& rng) {
    auto le = loop_erase(srw(kOrigin, n, rng)).le_path;
    LoopErasedTarget t;
    t.set = PointSet(le.sites.begin(), le.sites.end());
    t.extent = extent_inf(le.sites);
    t.radius = static_cast<std::int64_t>(std::ceil(factor * static_cast<double>(std::max<std::int64_t>(8, t.extent))));
    return t;
}

PastSummary sample_past(PastModel model, std::int64_t box, const LazyPastOptions& caps, RngStream& rng) {
    LazyPastOptions o = caps;
    o.box_radius = box;
    return lazy_past(kOrigin, model == PastModel::ZeroWired, rng, o);
}

}  // namespace

// ---------------------------------------------------------------------------
// Loop-erasure length

std::vector<LerwScalingRow> lerw_scaling(const LerwScalingOptions& opt, const RunContext& ctx) {
    if (opt.grid.empty()) throw std::invalid_argument("lerw_scaling: empty grid");
    const std::uint64_t nmax = *std::max_element(opt.grid.begin(), opt.grid.end());
    const auto horizon = static_cast<std::uint64_t>(std::ceil(opt.horizon_factor * static_cast<double>(nmax)));
    auto per_sample = run_samples<std::vector<double>>(opt.samples, 0, ctx, [&](std::uint64_t, RngStream& rng) {
        StreamingErasure se(kOrigin, horizon / 4 + 16);
        for (std::uint64_t t = 0; t < horizon; ++t) se.feed_direction(rng.direction());
        std::vector<double> rho;
        for (auto n : opt.grid) rho.push_back(static_cast<double>(se.rho(n)));
        return rho;
    });
    std::vector<LerwScalingRow> rows;
    for (std::size_t g = 0; g < opt.grid.size(); ++g) {
        LerwScalingRow row;
        row.n = opt.grid[g];
        const double n = static_cast<double>(row.n);
        const double scale = n / std::cbrt(std::log(n));
        std::vector<double> ratios;
        std::uint64_t dev = 0;
        for (const auto& s : per_sample) {
            if (s[g] > n) row.rho_at_most_n = false;
            const double r = s[g] / scale;
            ratios.push_back(r);
            row.ratio.add(r);
            if (std::abs(r - 1) > opt.deviation) ++dev;
        }
        row.q10 = quantile(ratios, 0.1);
        row.q50 = quantile(ratios, 0.5);
        row.q90 = quantile(ratios, 0.9);
        row.deviation_freq = ratios.empty() ? 0.0 : static_cast<double>(dev) / static_cast<double>(ratios.size());
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Capacity scaling

std::vector<CapacityScalingRow> capacity_scaling(const CapacityScalingOptions& opt, const RunContext& ctx) {
    std::vector<CapacityScalingRow> rows;
    for (std::size_t g = 0; g < opt.grid.size(); ++g) {
        const std::uint64_t n = opt.grid[g];
        struct Sample {
            double walk = 0, le = 0, le_inf = -1;
        };
        auto samples = run_samples<Sample>(opt.samples, g, ctx, [&](std::uint64_t, RngStream& rng) {
            Sample s;
            auto path = srw(kOrigin, n, rng);
            s.walk = walk_set_capacity(normalize_set(path.sites), opt.site_draws, rng);
            s.le = walk_set_capacity(loop_erase(path).le_path.sites, opt.site_draws, rng);
            if (opt.infinite_le) {
                // Grow the walk until its loop-erasure holds 2n points; the first n are then
                // taken as LE(X)^n.
                StreamingErasure se(kOrigin, 2 * n + 16);
                while (se.size() < 2 * n + 1) se.feed_direction(rng.direction());
                auto le = se.path();
                le.sites.resize(n + 1);
                s.le_inf = walk_set_capacity(le.sites, opt.site_draws, rng);
            }
            return s;
        });
        CapacityScalingRow row;
        row.n = n;
        const double dn = static_cast<double>(n), ln = std::log(dn);
        for (const auto& s : samples) {
            row.cap_walk.add(s.walk);
            row.walk_normalized.add(s.walk * ln / dn);
            row.cap_le.add(s.le);
            const double ratio = s.le / s.walk;
            row.ratio.add(ratio);
            row.min_ratio = std::min(row.min_ratio, ratio);
            if (ratio > 1) ++row.ratio_above_one;
            if (opt.infinite_le) {
                row.cap_le_inf.add(s.le_inf);
                if (s.le_inf >= opt.upper_tail_c * dn / std::pow(ln, 2.0 / 3.0)) ++row.upper_tail;
                if (s.le_inf <= opt.lower_tail_c * dn / ln) ++row.lower_tail;
            }
        }
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Non-intersection

std::vector<NonintersectionRow> nonintersection(const NonintersectionOptions& opt, const RunContext& ctx) {
    std::vector<NonintersectionRow> rows;
    for (std::size_t g = 0; g < opt.grid.size(); ++g) {
        const std::uint64_t n = opt.grid[g];
        struct Sample {
            TwoRadius avoid;
            std::int64_t radius = 0;
        };
        auto samples = run_samples<Sample>(opt.samples, g, ctx, [&](std::uint64_t, RngStream& rng) {
            auto t = loop_erased_target(n, opt.truncation_factor, rng);
            return Sample{avoid_walk(t.set, t.extent, t.radius, rng), t.radius};
        });
        NonintersectionRow row;
        row.n = n;
        std::uint64_t ks = 0, kl = 0;
        for (const auto& s : samples) {
            ks += s.avoid.small;
            kl += s.avoid.large;
            row.truncation_radius.add(static_cast<double>(s.radius));
        }
        TailCurve c;
        c.add_point(static_cast<double>(n), ks, samples.size());
        c.add_point(static_cast<double>(n), kl, samples.size());
        row.at_r = c.points[0];
        row.at_2r = c.points[1];
        row.extrapolated = (4 * row.at_2r.p_hat - row.at_r.p_hat) / 3;
        rows.push_back(row);
    }
    return rows;
}

std::vector<ConditionalMomentRow> conditional_moment(int p, const NonintersectionOptions& opt, const RunContext& ctx) {
    if (p < 1) throw std::invalid_argument("conditional_moment: p must be >= 1");
    std::vector<ConditionalMomentRow> rows;
    for (std::size_t g = 0; g < opt.grid.size(); ++g) {
        const std::uint64_t n = opt.grid[g];
        auto samples = run_samples<double>(opt.samples, 1000 + g, ctx, [&](std::uint64_t, RngStream& rng) {
            auto t = loop_erased_target(n, opt.truncation_factor, rng);
            double prod = 1;
            for (int j = 0; j < p; ++j)
                if (!avoid_walk(t.set, t.extent, t.radius, rng).large) prod = 0;
            return prod;
        });
        ConditionalMomentRow row;
        row.n = n;
        row.p = p;
        for (double v : samples) row.moment.add(v);
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Past tails

namespace {

enum class PastQuantity { Intrinsic, Volume, Extrinsic };

PastTailResult past_tail(const PastTailOptions& opt, const RunContext& ctx, PastQuantity q) {
    std::vector<double> grid = opt.grid;
    if (grid.empty())
        grid = q == PastQuantity::Intrinsic ? one_arm_grid() : q == PastQuantity::Volume ? volume_grid() : extrinsic_grid();
    std::sort(grid.begin(), grid.end());
    auto radius_for = [&](double n) -> std::int64_t {
        switch (q) {
            case PastQuantity::Intrinsic: return box_radius_policy(n, opt.box_scale);
            case PastQuantity::Volume: return box_radius_policy(std::sqrt(n), opt.box_scale);
            case PastQuantity::Extrinsic:
                return static_cast<std::int64_t>(
                    std::llround(opt.box_scale * static_cast<double>(std::max<std::int64_t>(32, static_cast<std::int64_t>(2 * n)))));
        }
        return 0;
    };
    // One run per distinct box radius, capped at the largest n it serves.
    std::map<std::int64_t, std::vector<double>> groups;
    for (double n : grid) groups[radius_for(n)].push_back(n);
    PastTailResult res;
    res.curve.quantity = q == PastQuantity::Intrinsic ? "rad_int" : q == PastQuantity::Volume ? "volume" : "rad_ext";
    std::uint64_t task = q == PastQuantity::Intrinsic ? 0 : q == PastQuantity::Volume ? 100 : 200;
    for (const auto& [radius, ns] : groups) {
        const double top = ns.back();
        LazyPastOptions caps;
        if (q == PastQuantity::Intrinsic) caps.max_depth = static_cast<std::uint64_t>(top);
        if (q == PastQuantity::Volume) caps.max_volume = static_cast<std::uint64_t>(top);
        if (q == PastQuantity::Extrinsic) caps.max_extrinsic = static_cast<std::int64_t>(top);
        const std::int64_t R = radius;
        auto values = run_samples<double>(opt.samples, task++, ctx, [&](std::uint64_t, RngStream& rng) {
            auto s = sample_past(opt.model, R, caps, rng);
            switch (q) {
                case PastQuantity::Intrinsic: return static_cast<double>(s.intrinsic_radius);
                case PastQuantity::Volume: return static_cast<double>(s.volume);
                case PastQuantity::Extrinsic: return static_cast<double>(s.extrinsic_radius);
            }
            return 0.0;
        });
        auto part = TailCurve::from_values(res.curve.quantity, values, ns, R);
        for (const auto& p : part.points) res.curve.points.push_back(p);
    }
    const double b = q == PastQuantity::Intrinsic ? 1.0 : q == PastQuantity::Volume ? 0.5 : 2.0;
    res.fit = polylog_fit(res.curve, b);
    return res;
}

}  // namespace

PastTailResult one_arm(const PastTailOptions& opt, const RunContext& ctx) {
    return past_tail(opt, ctx, PastQuantity::Intrinsic);
}
PastTailResult volume_tail(const PastTailOptions& opt, const RunContext& ctx) {
    return past_tail(opt, ctx, PastQuantity::Volume);
}
PastTailResult extrinsic_tail(const PastTailOptions& opt, const RunContext& ctx) {
    return past_tail(opt, ctx, PastQuantity::Extrinsic);
}

std::vector<BallVolumeRow> ball_volumes(const BallVolumeOptions& opt, const RunContext& ctx) {
    LazyPastOptions caps;
    caps.max_depth = opt.max_depth;
    auto shells = run_samples<std::vector<std::uint64_t>>(opt.samples, 300, ctx, [&](std::uint64_t, RngStream& rng) {
        auto s = sample_past(opt.model, opt.box_radius, caps, rng);
        s.shell_sizes.resize(opt.max_depth + 1, 0);
        return s.shell_sizes;
    });
    std::vector<BallVolumeRow> rows(opt.max_depth + 1);
    for (std::uint64_t n = 0; n <= opt.max_depth; ++n) rows[n].n = n;
    for (const auto& sh : shells) {
        double cum = 0;
        for (std::uint64_t n = 0; n <= opt.max_depth; ++n) {
            cum += static_cast<double>(sh[n]);
            rows[n].shell.add(static_cast<double>(sh[n]));
            rows[n].ball.add(cum);
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Box intersections

std::vector<BoxIntersectionRow> box_intersection(const BoxIntersectionOptions& opt, const RunContext& ctx) {
    std::vector<BoxIntersectionRow> rows;
    for (std::size_t g = 0; g < opt.grid.size(); ++g) {
        const std::int64_t r = opt.grid[g];
        const std::int64_t kill = opt.truncation * r;
        if (kill + 1 > kPackLimit - static_cast<std::int64_t>(kPackMargin))
            throw std::invalid_argument("box_intersection: truncation box too large");
        auto samples = run_samples<double>(opt.samples, 400 + g, ctx, [&](std::uint64_t, RngStream& rng) {
            // Occupation counts of Y inside Lambda_r.
            FlatMap<std::uint32_t> occ(1 << 10);
            auto run = [&](std::array<std::int64_t, kDim> c, auto&& visit) {
                while (true) {
                    const std::int64_t m = std::max(std::max(std::abs(c[0]), std::abs(c[1])),
                                                    std::max(std::abs(c[2]), std::abs(c[3])));
                    if (m > kill) return;
                    if (m <= r) visit(pack(Point{c[0], c[1], c[2], c[3]}));
                    const int d = rng.direction();
                    c[static_cast<std::size_t>(d >> 1)] += (d & 1) ? -1 : 1;
                }
            };
            run({0, 0, 0, 0}, [&](std::uint64_t k) { ++occ[k]; });
            std::array<std::int64_t, kDim> x0{};
            for (auto& v : x0) v = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(2 * r + 1))) - r;
            double I = 0;
            run(x0, [&](std::uint64_t k) {
                if (const auto* c = occ.find(k)) I += *c;
            });
            return I;
        });
        BoxIntersectionRow row;
        row.r = r;
        std::uint64_t hits = 0;
        for (double I : samples) {
            row.i_r.add(I);
            row.i_r_sq.add(I * I);
            if (I > 0) ++hits;
        }
        TailCurve c;
        c.add_point(static_cast<double>(r), hits, samples.size(), kill);
        row.hit = c.points[0];
        row.tail_bound = 1.0 / static_cast<double>(opt.truncation * opt.truncation);
        rows.push_back(row);
    }
    return rows;
}

std::vector<UstBoxCountRow> ust_box_count(const UstBoxCountOptions& opt, const RunContext& ctx) {
    std::vector<UstBoxCountRow> rows;
    for (std::size_t g = 0; g < opt.grid.size(); ++g) {
        const std::int64_t r = opt.grid[g];
        const Region inner = Region::box(r);
        const auto sites = inner.sites();
        auto samples = run_samples<double>(opt.samples, 500 + g, ctx, [&](std::uint64_t, RngStream& rng) {
            auto dirs = wilson_partial(sites, opt.box_factor * r, rng);
            std::vector<std::uint8_t> dir_of(static_cast<std::size_t>(inner.cell_count()), kOutsideCell);
            for (std::size_t i = 0; i < sites.size(); ++i) dir_of[static_cast<std::size_t>(inner.cell(sites[i]))] = dirs[i];
            // Component of 0 in the tree edges with both ends in Lambda_r.
            std::vector<char> seen(static_cast<std::size_t>(inner.cell_count()), 0);
            std::vector<Point> stack{kOrigin};
            seen[static_cast<std::size_t>(inner.cell(kOrigin))] = 1;
            double count = 0;
            while (!stack.empty()) {
                Point x = stack.back();
                stack.pop_back();
                count += 1;
                const int px = dir_of[static_cast<std::size_t>(inner.cell(x))];
                for (int d = 0; d < kDegree; ++d) {
                    Point y = step(x, d);
                    if (!inner.contains(y)) continue;
                    const auto cy = static_cast<std::size_t>(inner.cell(y));
                    if (seen[cy]) continue;
                    if (px == d || dir_of[cy] == opposite(d)) {
                        seen[cy] = 1;
                        stack.push_back(y);
                    }
                }
            }
            return count;
        });
        UstBoxCountRow row;
        row.r = r;
        for (double c : samples) row.count.add(c);
        const double dr = static_cast<double>(r);
        row.normalized = row.count.mean() * std::log(dr) / std::pow(dr, 4);
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Avalanches

AvalancheTailResult avalanche_tails(const AvalancheTailOptions& opt, const RunContext& ctx) {
    const Region box = Region::box(opt.box_radius);
    struct Sample {
        double cluster = 0, topplings = 0, radius = -1;
    };
    auto samples = run_samples<Sample>(opt.samples, 600, ctx, [&](std::uint64_t, RngStream& rng) {
        auto a = sample_avalanche(box, rng);
        Sample s;
        s.cluster = static_cast<double>(a.cluster_size);
        s.topplings = static_cast<double>(a.total_topplings);
        s.radius = a.cluster_size ? static_cast<double>(a.ext_radius) : -1.0;
        return s;
    });
    AvalancheTailResult res;
    std::vector<double> c, t, r;
    for (const auto& s : samples) {
        c.push_back(s.cluster);
        t.push_back(s.topplings);
        r.push_back(s.radius);
        if (s.cluster == 0) ++res.empty;
        if (s.topplings < s.cluster) res.multiset_dominates = false;
    }
    res.cluster = TailCurve::from_values("cluster_size", c, opt.size_grid, opt.box_radius);
    res.topplings = TailCurve::from_values("topplings", t, opt.size_grid, opt.box_radius);
    res.radius = TailCurve::from_values("ext_radius", r, opt.radius_grid, opt.box_radius);
    return res;
}

// ---------------------------------------------------------------------------
// Hitting time against loop-erasure length

std::vector<WeakL1Row> weakl1_time_check(const WeakL1Options& opt, const RunContext& ctx) {
    struct Sample {
        bool hit = false;
        std::uint64_t tau = 0, le = 0;
    };
    const Point start{opt.start_distance, 0, 0, 0};
    auto samples = run_samples<Sample>(opt.samples, 700, ctx, [&](std::uint64_t, RngStream& rng) {
        StreamingErasure se(start, 256);
        std::array<std::int64_t, kDim> c{start[0], 0, 0, 0};
        for (std::uint64_t t = 1; t <= opt.horizon; ++t) {
            const int d = rng.direction();
            se.feed_direction(d);
            std::int64_t& cc = c[static_cast<std::size_t>(d >> 1)];
            cc += (d & 1) ? -1 : 1;
            if (std::abs(cc) > opt.escape_radius) return Sample{};
            if (c[0] == 0 && c[1] == 0 && c[2] == 0 && c[3] == 0) return Sample{true, t, se.size() - 1};
        }
        return Sample{};
    });
    std::vector<WeakL1Row> rows;
    for (auto L : opt.lengths)
        for (auto mult : opt.multipliers) {
            WeakL1Row row;
            row.L = L;
            row.m = mult * L;
            for (const auto& s : samples) {
                if (!s.hit) continue;
                ++row.hits;
                if (s.le <= L) {
                    ++row.short_le;
                    if (s.tau >= row.m) ++row.short_and_late;
                }
            }
            if (row.hits) {
                row.p_short = static_cast<double>(row.short_le) / static_cast<double>(row.hits);
                row.p_late_short = static_cast<double>(row.short_and_late) / static_cast<double>(row.hits);
            }
            const double dl = static_cast<double>(L);
            if (row.p_short > 0)
                row.fitted_c = row.p_late_short * static_cast<double>(row.m) / (dl * std::log(dl + 1) * row.p_short);
            rows.push_back(row);
        }
    return rows;
}

// ---------------------------------------------------------------------------
// Fit calibration

std::vector<FitCalibrationRow> fit_calibration(const FitCalibrationOptions& opt, const RunContext& ctx) {
    struct Grid {
        const char* name;
        std::vector<double> n;
        double b;
        /// Value of the curve at the smallest n, and the sample size per point (0: exact only).
        double y0;
        std::uint64_t samples;
    };
    const std::vector<Grid> grids{
        {"one-arm", one_arm_grid(), 1.0, 0.1, 100000},
        {"volume-tail", volume_grid(), 0.5, 0.3, 100000},
        {"extrinsic-tail", extrinsic_grid(), 2.0, 0.05, 100000},
        {"ball-volume", ball_grid(), -1.0, 30.0, 0},
    };
    std::vector<FitCalibrationRow> rows;
    std::uint64_t task = 800;
    for (const auto& g : grids)
        for (double a : opt.a_values) {
            const double n0 = g.n.front();
            auto curve = [&](double n) {
                return g.y0 * std::pow(n / n0, -g.b) * std::pow(std::log(n) / std::log(n0), a);
            };
            std::vector<double> y;
            for (double n : g.n) y.push_back(curve(n));
            FitCalibrationRow row;
            row.grid_name = g.name;
            row.b = g.b;
            row.a_true = a;
            row.a_exact = polylog_fit(g.n, y, g.b).a;
            row.a_median = row.a_q10 = row.a_q90 = row.a_exact;
            if (g.samples > 0) {
                auto fits = run_samples<double>(opt.replicates, task++, ctx, [&](std::uint64_t, RngStream& rng) {
                    TailCurve c;
                    for (double n : g.n) {
                        std::binomial_distribution<std::uint64_t> bin(g.samples, std::min(1.0, curve(n)));
                        c.add_point(n, bin(rng), g.samples);
                    }
                    return polylog_fit(c, g.b).a;
                });
                row.replicates = fits.size();
                row.a_median = quantile(fits, 0.5);
                row.a_q10 = quantile(fits, 0.1);
                row.a_q90 = quantile(fits, 0.9);
            }
            rows.push_back(row);
        }
    return rows;
}

}  // namespace ust4
