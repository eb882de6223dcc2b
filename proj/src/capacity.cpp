#include "ust4/capacity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "ust4/flat_map.hpp"
#include "ust4/stats.hpp"

namespace ust4 {

const char* to_string(CapMethod m) { return m == CapMethod::MC ? "mc" : "exact"; }

std::vector<Point> normalize_set(std::vector<Point> A) {
    std::sort(A.begin(), A.end());
    A.erase(std::unique(A.begin(), A.end()), A.end());
    return A;
}

std::vector<Point> set_union(const std::vector<Point>& A, const std::vector<Point>& B) {
    std::vector<Point> u = A;
    u.insert(u.end(), B.begin(), B.end());
    return normalize_set(std::move(u));
}

std::vector<Point> set_intersection(const std::vector<Point>& A, const std::vector<Point>& B) {
    auto a = normalize_set(A), b = normalize_set(B);
    std::vector<Point> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

KilledWalkSolution::KilledWalkSolution(const std::vector<Point>& A, std::int64_t radius, const DirichletOptions& opt)
    : A_(normalize_set(A)), radius_(radius), h_(dirichlet_solve(Box{radius, true}, A_, 1.0, {}, opt)) {}

double KilledWalkSolution::escape(const Point& x) const {
    if (!h_.covers(x) || norm_inf(x) > radius_) throw std::out_of_range("KilledWalkSolution::escape: site outside box");
    double s = 0.0;
    for (const auto& q : neighbors(x)) s += h_.at(q);
    return s / kDegree;
}

double KilledWalkSolution::hit(const Point& x) const {
    if (norm_inf(x) > radius_) return 0.0;
    return 1.0 - h_.at(x);
}

double KilledWalkSolution::capacity() const {
    double s = 0.0;
    for (const auto& a : A_) s += kConductance * escape(a);
    return s;
}

std::int64_t exact_radius(const std::vector<Point>& sets_union, const CapacityOptions& opt) {
    std::int64_t extent = 0;
    for (const auto& p : sets_union) extent = std::max(extent, norm_inf(p));
    return std::max(opt.exact_min_radius, extent + opt.exact_margin);
}

namespace {

double richardson(double small, double large) { return (4.0 * large - small) / 3.0; }

std::int64_t diameter_inf(const std::vector<Point>& A) {
    if (A.empty()) return 0;
    std::int64_t d = 0;
    for (int i = 0; i < kDim; ++i) {
        std::int64_t lo = A[0][i], hi = A[0][i];
        for (const auto& p : A) {
            lo = std::min(lo, p[i]);
            hi = std::max(hi, p[i]);
        }
        d = std::max(d, hi - lo);
    }
    return d;
}

/// Reason the exact backend cannot handle the set, or empty if it can.
std::string exact_unavailable(const std::vector<Point>& U, const CapacityOptions& opt) {
    if (U.size() > opt.exact_max_sites) return "set larger than exact-backend site cap";
    if (diameter_inf(U) > opt.exact_max_diameter) return "set diameter above exact-backend cap";
    if (2 * exact_radius(U, opt) > opt.solver.radius_cap) return "required solver radius above cap";
    return {};
}

/// Sites of A within `window` of x, shifted so that x is the origin.
PointSet local_window(const std::vector<Point>& A, const Point& x, std::int64_t window) {
    PointSet s(64);
    for (const auto& a : A) {
        Point d = a - x;
        if (norm_inf(d) <= window) s.insert(d);
    }
    return s;
}

struct TwoRadius {
    bool small = false, large = false;
};

/// Walk from the origin of a local frame. avoid_start: the event is "no return
/// to the set at times >= 1"; otherwise "the set is hit at some time >= 0".
/// Reports the event before exiting Lambda_R and Lambda_2R around the start.
TwoRadius local_walk(const PointSet& set, bool escape_event, std::int64_t R, RngStream& rng) {
    std::array<std::int64_t, kDim> c{};
    std::uint64_t key = pack(kOrigin);
    bool passed_small = false;
    bool hit = !escape_event && set.contains_key(key);
    if (hit) return {true, true};
    while (true) {
        int d = rng.direction();
        key = pack_step(key, d);
        std::int64_t& cc = c[static_cast<std::size_t>(d >> 1)];
        cc += (d & 1) ? -1 : 1;
        if (std::abs(cc) > R) passed_small = true;
        if (std::abs(cc) > 2 * R) {
            if (escape_event) return {true, true};
            return {false, false};
        }
        if (set.contains_key(key)) {
            if (escape_event) return {passed_small, false};
            return {!passed_small, true};
        }
    }
}

void check_mc_radius(std::int64_t R) {
    if (R < 1 || 2 * R + 1 > kPackLimit - static_cast<std::int64_t>(kPackMargin))
        throw std::invalid_argument("capacity: escape radius out of range");
}

/// MC escape estimate for one site: returns mean/var of the per-walk extrapolated value.
MeanVar mc_escape_site(const std::vector<Point>& A, const Point& x, std::uint64_t walks, std::int64_t R,
                       RngStream& rng, MeanVar* small = nullptr, MeanVar* large = nullptr) {
    PointSet w = local_window(A, x, 2 * R + 1);
    MeanVar mv;
    for (std::uint64_t i = 0; i < walks; ++i) {
        auto r = local_walk(w, true, R, rng);
        mv.add(richardson(r.small, r.large));
        if (small) small->add(r.small);
        if (large) large->add(r.large);
    }
    return mv;
}

CapacityEstimate exact_escape(const Point& x, const std::vector<Point>& A, const CapacityOptions& opt) {
    std::int64_t R = exact_radius(A, opt);
    KilledWalkSolution s(A, R, opt.solver), l(A, 2 * R, opt.solver);
    CapacityEstimate e;
    e.method = CapMethod::Exact;
    e.radius_small = R;
    e.radius_large = 2 * R;
    e.value_small = s.escape(x);
    e.value_large = l.escape(x);
    e.value = richardson(e.value_small, e.value_large);
    e.stderr_ = std::abs(e.value_large - e.value_small) / 3.0;
    return e;
}

}  // namespace

CapacityEstimate escape_probability(const Point& x, const std::vector<Point>& A_in, CapMethod method, RngStream& rng,
                                    const CapacityOptions& opt) {
    auto A = normalize_set(A_in);
    if (!std::binary_search(A.begin(), A.end(), x))
        throw std::invalid_argument("escape_probability: x must belong to A");
    CapacityEstimate e;
    if (method == CapMethod::Exact) {
        auto why = exact_unavailable(A, opt);
        if (why.empty()) return exact_escape(x, A, opt);
        e.fell_back_to_mc = true;
        e.note = why;
    }
    check_mc_radius(opt.r_esc);
    MeanVar small, large;
    auto mv = mc_escape_site(A, x, opt.samples_per_site, opt.r_esc, rng, &small, &large);
    e.method = CapMethod::MC;
    e.value = mv.mean();
    e.stderr_ = mv.stderr_();
    e.radius_small = opt.r_esc;
    e.radius_large = 2 * opt.r_esc;
    e.value_small = small.mean();
    e.value_large = large.mean();
    e.walks = mv.count();
    return e;
}

CapacityEstimate capacity(const std::vector<Point>& A_in, CapMethod method, RngStream& rng,
                          const CapacityOptions& opt) {
    auto A = normalize_set(A_in);
    CapacityEstimate e;
    e.method = method;
    if (A.empty()) return e;
    if (method == CapMethod::Exact) {
        auto why = exact_unavailable(A, opt);
        if (why.empty()) {
            std::int64_t R = exact_radius(A, opt);
            KilledWalkSolution s(A, R, opt.solver), l(A, 2 * R, opt.solver);
            e.radius_small = R;
            e.radius_large = 2 * R;
            e.value_small = s.capacity();
            e.value_large = l.capacity();
            e.value = richardson(e.value_small, e.value_large);
            e.stderr_ = std::abs(e.value_large - e.value_small) / 3.0;
            return e;
        }
        e.fell_back_to_mc = true;
        e.note = why;
    }
    check_mc_radius(opt.r_esc);
    e.method = CapMethod::MC;
    e.radius_small = opt.r_esc;
    e.radius_large = 2 * opt.r_esc;
    MeanVar small, large;
    if (opt.site_draws > 0) {
        MeanVar mv;
        for (std::uint64_t i = 0; i < opt.site_draws; ++i) {
            const Point& x = A[rng.below(A.size())];
            mv.merge(mc_escape_site(A, x, 1, opt.r_esc, rng, &small, &large));
        }
        const double scale = kConductance * static_cast<double>(A.size());
        e.value = scale * mv.mean();
        e.stderr_ = scale * mv.stderr_();
        e.value_small = scale * small.mean();
        e.value_large = scale * large.mean();
        e.walks = mv.count();
        return e;
    }
    double var = 0.0;
    for (const auto& x : A) {
        MeanVar s1, l1;
        auto mv = mc_escape_site(A, x, opt.samples_per_site, opt.r_esc, rng, &s1, &l1);
        e.value += kConductance * mv.mean();
        e.value_small += kConductance * s1.mean();
        e.value_large += kConductance * l1.mean();
        var += kConductance * kConductance * mv.stderr_() * mv.stderr_();
        e.walks += mv.count();
    }
    e.stderr_ = std::sqrt(var);
    return e;
}

CapacityEstimate chi_tilde(const std::vector<Point>& A_in, const std::vector<Point>& B_in, CapMethod method,
                           RngStream& rng, const CapacityOptions& opt) {
    auto A = normalize_set(A_in), B = normalize_set(B_in);
    CapacityEstimate e;
    e.method = method;
    if (A.empty() || B.empty()) return e;
    auto U = set_union(A, B);
    if (method == CapMethod::Exact) {
        auto why = exact_unavailable(U, opt);
        if (why.empty()) {
            std::int64_t R = exact_radius(U, opt);
            double v[2];
            for (int k = 0; k < 2; ++k) {
                std::int64_t r = k == 0 ? R : 2 * R;
                KilledWalkSolution sa(A, r, opt.solver), sb(B, r, opt.solver);
                double s = 0.0;
                for (const auto& x : A) s += kConductance * sa.escape(x) * sb.hit(x);
                v[k] = s;
            }
            e.radius_small = R;
            e.radius_large = 2 * R;
            e.value_small = v[0];
            e.value_large = v[1];
            e.value = richardson(v[0], v[1]);
            e.stderr_ = std::abs(v[1] - v[0]) / 3.0;
            return e;
        }
        e.fell_back_to_mc = true;
        e.note = why;
    }
    check_mc_radius(opt.r_esc);
    e.method = CapMethod::MC;
    e.radius_small = opt.r_esc;
    e.radius_large = 2 * opt.r_esc;
    const std::int64_t R = opt.r_esc;
    double var = 0.0;
    for (const auto& x : A) {
        PointSet wa = local_window(A, x, 2 * R + 1), wb = local_window(B, x, 2 * R + 1);
        MeanVar prod;
        for (std::uint64_t i = 0; i < opt.samples_per_site; ++i) {
            auto esc = local_walk(wa, true, R, rng);
            auto hit = local_walk(wb, false, R, rng);
            prod.add(richardson(esc.small && hit.small, esc.large && hit.large));
        }
        e.value += kConductance * prod.mean();
        var += kConductance * kConductance * prod.stderr_() * prod.stderr_();
        e.walks += 2 * prod.count();
    }
    e.stderr_ = std::sqrt(var);
    return e;
}

Decomposition decomposition_check(const std::vector<Point>& A_in, const std::vector<Point>& B_in,
                                  const CapacityOptions& opt, double tolerance) {
    auto A = normalize_set(A_in), B = normalize_set(B_in);
    auto U = set_union(A, B), I = set_intersection(A, B);
    Decomposition d;
    d.tolerance = tolerance;
    if (U.empty()) return d;
    auto why = exact_unavailable(U, opt);
    if (!why.empty()) throw std::invalid_argument("decomposition_check: " + why);
    const std::int64_t R = exact_radius(U, opt);
    d.radius_small = R;
    d.radius_large = 2 * R;
    struct Terms {
        double ca = 0, cb = 0, cab = 0, xab = 0, xba = 0, ci = 0;
        double eps() const { return cab - ca - cb + xab + xba; }
    } t[2];
    for (int k = 0; k < 2; ++k) {
        std::int64_t r = k == 0 ? R : 2 * R;
        Terms& tk = t[k];
        if (!A.empty() && !B.empty()) {
            KilledWalkSolution sa(A, r, opt.solver), sb(B, r, opt.solver), su(U, r, opt.solver);
            tk.ca = sa.capacity();
            tk.cb = sb.capacity();
            tk.cab = su.capacity();
            for (const auto& y : A) tk.xab += kConductance * su.escape(y) * sb.hit(y);
            for (const auto& y : B) tk.xba += kConductance * su.escape(y) * sa.hit(y);
        } else {
            KilledWalkSolution su(U, r, opt.solver);
            tk.cab = su.capacity();
            (A.empty() ? tk.cb : tk.ca) = tk.cab;
        }
        if (!I.empty()) tk.ci = KilledWalkSolution(I, r, opt.solver).capacity();
    }
    d.cap_a = richardson(t[0].ca, t[1].ca);
    d.cap_b = richardson(t[0].cb, t[1].cb);
    d.cap_ab = richardson(t[0].cab, t[1].cab);
    d.chi_ab = richardson(t[0].xab, t[1].xab);
    d.chi_ba = richardson(t[0].xba, t[1].xba);
    d.cap_intersection = richardson(t[0].ci, t[1].ci);
    d.epsilon_small = t[0].eps();
    d.epsilon_large = t[1].eps();
    d.epsilon = d.cap_ab - d.cap_a - d.cap_b + d.chi_ab + d.chi_ba;
    d.within_bounds = d.epsilon >= -tolerance && d.epsilon <= d.cap_intersection + tolerance;
    return d;
}

}  // namespace ust4
