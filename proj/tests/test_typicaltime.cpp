#include <cmath>
#include <functional>

#include "doctest.h"
#include "ust4/lerw.hpp"
#include "ust4/typicaltime.hpp"

using namespace ust4;

namespace {

LatticePath straight(std::size_t n) {
    std::vector<Point> s;
    for (std::size_t i = 0; i <= n; ++i) s.push_back(Point{static_cast<std::int64_t>(i), 0, 0, 0});
    return LatticePath(std::move(s));
}

/// Boustrophedon path through the 4^4 box: 256 sites, every step a unit step.
LatticePath snake256() {
    std::vector<Point> s;
    std::array<bool, 4> rev{};
    Point p{0, 0, 0, 0};
    std::function<void(int)> go = [&](int axis) {
        if (axis < 0) {
            s.push_back(p);
            return;
        }
        auto ax = static_cast<std::size_t>(axis);
        for (int step = 0; step < 4; ++step) {
            p[axis] = rev[ax] ? 3 - step : step;
            go(axis - 1);
        }
        rev[ax] = !rev[ax];
    };
    go(3);
    return LatticePath(std::move(s));
}

/// Exact Esc_k(eta^i) by enumerating all 8^k walks.
double esc_exact(const LatticePath& eta, std::size_t i, int k) {
    PointSet avoid(eta.sites.begin(), eta.sites.begin() + static_cast<std::ptrdiff_t>(i));
    std::uint64_t ok = 0, total = 0;
    std::function<void(const Point&, int)> rec = [&](const Point& x, int left) {
        if (left == 0) {
            ++ok;
            return;
        }
        for (int d = 0; d < kDegree; ++d) {
            Point y = step(x, d);
            if (!avoid.contains(y)) rec(y, left - 1);
        }
    };
    rec(eta[i], k);
    total = 1;
    for (int j = 0; j < k; ++j) total *= kDegree;
    return static_cast<double>(ok) / static_cast<double>(total);
}

EscProfile constant_profile(std::size_t n, const EscGrid& g, double v) {
    EscProfile p;
    p.n = n;
    p.grid = g;
    p.value.assign(g.i.size() * g.k.size(), v);
    p.stderr_.assign(p.value.size(), 0.0);
    return p;
}

double harmonic(std::size_t n) {
    double h = 0;
    for (std::size_t k = 1; k <= n; ++k) h += 1.0 / static_cast<double>(k);
    return h;
}

}  // namespace

TEST_CASE("esc_probability: trivial cases") {
    RngStream r(1);
    auto eta = straight(4);
    CHECK(esc_probability(eta, 0, 10, 100, r).value == 1.0);
    auto e = esc_probability(eta, 2, 1, 100000, r);
    CHECK(std::abs(e.value - 7.0 / 8.0) < 3 * std::sqrt(7.0 / 64.0 / 100000));
    CHECK_THROWS(esc_probability(eta, 5, 1, 10, r));
    CHECK_THROWS(esc_probability(LatticePath({kOrigin, unit(0), kOrigin}), 1, 1, 10, r));
}

TEST_CASE("esc_probability matches exhaustive enumeration for short horizons") {
    RngStream r(2);
    auto w = srw(kOrigin, 200, r);
    auto eta = loop_erase(w).le_path;
    REQUIRE(eta.length() >= 12);
    for (std::size_t i : {1u, 3u, 6u, 12u})
        for (int k : {1, 2, 4, 5}) {
            double ex = esc_exact(eta, i, k);
            auto e = esc_probability(eta, i, static_cast<std::uint64_t>(k), 40000, r);
            CHECK(std::abs(e.value - ex) < 4 * std::sqrt(ex * (1 - ex) / 40000) + 1e-12);
        }
}

TEST_CASE("esc_profile rows are non-increasing in k and agree with single estimates") {
    RngStream r(3);
    auto eta = snake256();
    REQUIRE(eta.length() == 255);
    REQUIRE(eta.is_nearest_neighbor());
    REQUIRE(eta.is_self_avoiding());
    auto g = default_esc_grid(eta.length());
    CHECK(g.k.back() == 128);
    CHECK(g.i.size() == 255);
    auto p = esc_profile(eta, g, 400, r);
    for (std::size_t row = 0; row < g.i.size(); ++row)
        for (std::size_t j = 1; j < g.k.size(); ++j) CHECK(p.at(row, j) <= p.at(row, j - 1));
    for (std::size_t row : {10u, 100u, 200u}) {
        auto e = esc_probability(eta, g.i[row], 8, 4000, r);
        double se = std::hypot(e.stderr_, p.stderr_[row * g.k.size() + 3]);
        CHECK(std::abs(e.value - p.at(row, 3)) < 4 * se + 1e-9);
    }
}

TEST_CASE("t_tilde: exact values and bounds") {
    RngStream r(4);
    auto one = straight(1);
    auto p1 = esc_profile(one, default_esc_grid(1), 100, r);
    CHECK(t_tilde(one, p1) == 1.0);

    // Esc = 1 everywhere gives n H_n under both grids.
    for (std::size_t n : {7u, 64u, 1000u}) {
        double want = static_cast<double>(n) * harmonic(n);
        CHECK(t_tilde(straight(n), constant_profile(n, full_esc_grid(n), 1.0)) == doctest::Approx(want));
        CHECK(t_tilde(straight(n), constant_profile(n, default_esc_grid(n), 1.0)) ==
              doctest::Approx(want).epsilon(1e-9));
    }
    CHECK_THROWS_AS(t_tilde(straight(5), constant_profile(6, full_esc_grid(6), 1.0)), InsufficientProfile);
    EscGrid bad{{1, 2}, {1}};
    CHECK_THROWS_AS(t_tilde(straight(3), constant_profile(3, bad, 1.0)), InsufficientProfile);

    auto eta = loop_erase(srw(kOrigin, 2000, r)).le_path;
    auto p = esc_profile(eta, default_esc_grid(eta.length()), 100, r);
    const double n = static_cast<double>(eta.length());
    double t = t_tilde(eta, p);
    CHECK(t >= 0);
    CHECK(t <= n * (1 + std::log(n)));
}

TEST_CASE("t_tilde: a straight line beats a folded path of the same length") {
    RngStream r(5);
    auto fold = snake256();
    auto line = straight(fold.length());
    auto pl = esc_profile(line, default_esc_grid(line.length()), 400, r);
    auto pf = esc_profile(fold, default_esc_grid(fold.length()), 400, r);
    double tl = t_tilde(line, pl), tf = t_tilde(fold, pf);
    MESSAGE("line " << tl << " folded " << tf);
    CHECK(tl > tf);
}

TEST_CASE("t_tilde is monotone under path extension with a shared profile") {
    RngStream r(6);
    auto eta = loop_erase(srw(kOrigin, 400, r)).le_path;
    const std::size_t n = eta.length();
    REQUIRE(n >= 20);
    auto full = esc_profile(eta, full_esc_grid(n), 50, r);
    double prev = 0;
    for (std::size_t m = 1; m <= n; m += 7) {
        EscProfile sub;
        sub.n = m;
        for (std::size_t i = 0; i < m; ++i) sub.grid.i.push_back(i);
        for (std::uint64_t k = 1; k <= m; ++k) sub.grid.k.push_back(k);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t k = 0; k < m; ++k) sub.value.push_back(full.at(i, k));
        double t = t_tilde(eta.slice(0, m), sub);
        CHECK(t >= prev);
        prev = t;
    }
    CHECK(t_tilde(eta, full) >= prev);
}

TEST_CASE("classify_delta_good") {
    const std::size_t n = 100;
    auto eta = straight(n);
    CHECK(classify_delta_good(eta, constant_profile(n, full_esc_grid(n), 0.1), 0.1));
    // Esc = 1: every A_i = H_100 ~ 5.19 exceeds (ln 100)^{0.43} ~ 1.93.
    CHECK_FALSE(classify_delta_good(eta, constant_profile(n, full_esc_grid(n), 1.0), 0.1));
    CHECK(classify_delta_good(eta, constant_profile(n, full_esc_grid(n), 1.0), harmonic(n)));
}

TEST_CASE("classify_delta_good: loop-erased walk prefixes are rarely bad") {
    RngStream r(7);
    const std::uint64_t n = 1 << 14;
    int bad = 0, total = 0;
    for (int s = 0; s < 40; ++s) {
        auto w = srw(kOrigin, 1 + r.below(n), r);
        auto eta = loop_erase(w).le_path;
        if (eta.length() < 2) continue;
        auto p = esc_profile(eta, default_esc_grid(eta.length()), 200, r);
        ++total;
        if (!classify_delta_good(eta, p, 0.5)) ++bad;
    }
    MESSAGE("bad " << bad << " of " << total);
    CHECK(static_cast<double>(bad) / total < 0.05 + 3 * std::sqrt(0.05 * 0.95 / total));
}

TEST_CASE("time_radius") {
    RngStream r(8);
    auto region = Region::box(4);
    auto f = wilson_wired(region, r);
    // Past of a vertex nothing points at.
    OrientedForest lone(Region::box(1));
    for (const auto& x : Region::box(1).sites()) lone.cells()[Region::box(1).cell(x)] = 0;
    lone.validate();
    auto lr = time_radius(lone, Point{-1, 0, 0, 0}, 10, r);
    CHECK(lr.value == 0.0);
    CHECK(lr.past_volume == 1);

    // With no Esc samples every Esc is 1, so T(x) = depth * H_depth.
    for (int rep = 0; rep < 5; ++rep) {
        auto g = wilson_wired(region, r);
        auto tr = time_radius(g, kOrigin, 0, r);
        auto summary = g.past_summary(kOrigin);
        CHECK(tr.past_volume == summary.volume);
        CHECK(tr.intrinsic_radius == summary.intrinsic_radius);
        double d = static_cast<double>(tr.intrinsic_radius);
        CHECK(tr.value == doctest::Approx(d * harmonic(tr.intrinsic_radius)).epsilon(1e-9));
    }

    auto tr = time_radius(f, kOrigin, 200, r);
    const double vol = static_cast<double>(tr.past_volume), rad = static_cast<double>(tr.intrinsic_radius);
    CHECK(tr.value >= 0);
    CHECK(tr.value <= vol * (1 + std::log(std::max(rad, 1.0))));
    if (tr.intrinsic_radius >= 2) {
        auto path = f.tree_path(kOrigin, tr.argmax);
        REQUIRE(path.has_value());
        CHECK(path->length() >= 1);
        EscGrid g;
        for (std::size_t i = 0; i < path->length(); ++i) g.i.push_back(i);
        for (std::uint64_t k = 1; k <= path->length(); k *= 2) g.k.push_back(k);
        auto p = esc_profile(*path, g, 2000, r);
        CHECK(t_tilde(*path, p) == doctest::Approx(tr.value).epsilon(0.15));
    }
}
