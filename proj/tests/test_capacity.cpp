#include <cmath>

#include "doctest.h"
#include "ust4/capacity.hpp"
#include "ust4/lattice.hpp"

using namespace ust4;

namespace {

constexpr double kEscapeZ4 = 0.806794;  // 1 - return probability of SRW on Z^4

std::vector<Point> random_set(RngStream& r, std::size_t n, std::int64_t radius) {
    std::vector<Point> s;
    while (s.size() < n) {
        Point p;
        for (int i = 0; i < kDim; ++i) p[i] = static_cast<std::int64_t>(r.below(2 * radius + 1)) - radius;
        s.push_back(p);
        s = normalize_set(s);
    }
    return s;
}

}  // namespace

TEST_CASE("exact escape of a singleton") {
    RngStream r(1);
    auto e = escape_probability(kOrigin, {kOrigin}, CapMethod::Exact, r);
    CHECK(e.method == CapMethod::Exact);
    CHECK_FALSE(e.fell_back_to_mc);
    CHECK(e.value == doctest::Approx(kEscapeZ4).epsilon(2e-4));
    CHECK(e.value_small > e.value_large);
    auto c = capacity({kOrigin}, CapMethod::Exact, r);
    CHECK(c.value == doctest::Approx(8 * kEscapeZ4).epsilon(2e-4));
}

TEST_CASE("escape is zero when every neighbour is in the set") {
    RngStream r(2);
    std::vector<Point> A{kOrigin};
    for (const auto& q : neighbors(kOrigin)) A.push_back(q);
    CHECK(escape_probability(kOrigin, A, CapMethod::Exact, r).value == doctest::Approx(0.0));
    CapacityOptions o;
    o.r_esc = 8;
    o.samples_per_site = 2000;
    CHECK(escape_probability(kOrigin, A, CapMethod::MC, r, o).value == 0.0);
    CHECK_THROWS(escape_probability(Point{5, 0, 0, 0}, A, CapMethod::Exact, r));
}

TEST_CASE("capacity: empty set and monotonicity") {
    RngStream r(3);
    CHECK(capacity({}, CapMethod::Exact, r).value == 0.0);
    CHECK(capacity({}, CapMethod::MC, r).value == 0.0);
    for (int trial = 0; trial < 5; ++trial) {
        auto A = random_set(r, 6, 3);
        auto B = A;
        B.push_back(Point{4, 0, 0, static_cast<std::int64_t>(trial)});
        CHECK(capacity(A, CapMethod::Exact, r).value <= capacity(B, CapMethod::Exact, r).value + 1e-9);
        // Monotone at each radius too.
        KilledWalkSolution sa(A, 9), sb(normalize_set(B), 9);
        CHECK(sa.capacity() <= sb.capacity() + 1e-9);
    }
}

TEST_CASE("MC escape agrees with the exact backend") {
    RngStream r(4);
    std::vector<Point> A{kOrigin, Point{1, 0, 0, 0}, Point{0, 2, 0, 0}};
    auto ex = escape_probability(kOrigin, A, CapMethod::Exact, r);
    CapacityOptions o;
    o.r_esc = 12;
    o.samples_per_site = 100000;
    auto mc = escape_probability(kOrigin, A, CapMethod::MC, r, o);
    CHECK(mc.walks == 100000);
    CHECK(std::abs(mc.value - ex.value) < 4 * mc.stderr_ + 2e-3);
    auto cmc = capacity(A, CapMethod::MC, r, o);
    auto cex = capacity(A, CapMethod::Exact, r);
    CHECK(std::abs(cmc.value - cex.value) < 4 * cmc.stderr_ + 6e-3);
}

TEST_CASE("site-draw capacity estimator") {
    RngStream r(5);
    auto A = random_set(r, 40, 3);
    auto ex = capacity(A, CapMethod::Exact, r);
    CapacityOptions o;
    o.r_esc = 12;
    o.site_draws = 200000;
    auto mc = capacity(A, CapMethod::MC, r, o);
    CHECK(mc.walks == 200000);
    CHECK(std::abs(mc.value - ex.value) < 4 * mc.stderr_ + 0.002 * ex.value);
}

TEST_CASE("far-apart pair falls back to MC and is nearly additive") {
    RngStream r(6);
    std::vector<Point> A{kOrigin, Point{1'000'000, 0, 0, 0}};
    CapacityOptions o;
    o.r_esc = 16;
    o.samples_per_site = 40000;
    auto c = capacity(A, CapMethod::Exact, r, o);
    CHECK(c.fell_back_to_mc);
    CHECK(c.method == CapMethod::MC);
    CHECK_FALSE(c.note.empty());
    CHECK(std::abs(c.value - 2 * 8 * kEscapeZ4) < 4 * c.stderr_ + 0.01);
}

TEST_CASE("last-exit decomposition of hitting probabilities") {
    // P_x(tau_A < exit) = sum_y G_R(x,y) P_y(tau_A^+ > exit) with G_R from a source solve.
    const std::int64_t R = 7;
    std::vector<Point> A{kOrigin, Point{1, 1, 0, 0}, Point{-2, 0, 0, 1}};
    KilledWalkSolution s(A, R);
    std::vector<ScalarField> G;
    for (const auto& y : A) G.push_back(dirichlet_solve(Box{R, true}, {}, 0.0, {{y, 1.0}}));
    for (const Point& x : {Point{3, 0, 0, 0}, Point{0, -2, 1, 1}, Point{1, 1, 0, 0}, Point{5, 5, -5, 0}}) {
        double sum = 0;
        for (std::size_t i = 0; i < A.size(); ++i) sum += G[i].at(x) * s.escape(A[i]);
        CHECK(s.hit(x) == doctest::Approx(sum).epsilon(1e-7));
    }
    CHECK(s.hit(Point{R + 3, 0, 0, 0}) == 0.0);
}

TEST_CASE("chi_tilde: empty, monotone, singleton oracle") {
    RngStream r(7);
    std::vector<Point> A{kOrigin, Point{0, 1, 0, 0}};
    CHECK(chi_tilde(A, {}, CapMethod::Exact, r).value == 0.0);
    CHECK(chi_tilde({}, A, CapMethod::MC, r).value == 0.0);
    std::vector<Point> B{Point{3, 0, 0, 0}};
    std::vector<Point> B2{Point{3, 0, 0, 0}, Point{3, 1, 0, 0}};
    CHECK(chi_tilde(A, B, CapMethod::Exact, r).value <= chi_tilde(A, B2, CapMethod::Exact, r).value + 1e-12);
    CHECK(chi_tilde(A, A, CapMethod::Exact, r).value == doctest::Approx(capacity(A, CapMethod::Exact, r).value));

    // Singletons: chi = 8 Es(0) P_0(tau_x < inf) = 8 Es(0)^2 G(x), G from source solves at R = 12, 24.
    const Point x{3, 0, 0, 0};
    auto g12 = dirichlet_solve(Box{12, true}, {}, 0.0, {{kOrigin, 1.0}});
    auto g24 = dirichlet_solve(Box{24, true}, {}, 0.0, {{kOrigin, 1.0}});
    double oracle = 8 * kEscapeZ4 * kEscapeZ4 * (4 * g24.at(x) - g12.at(x)) / 3;
    auto ex = chi_tilde({kOrigin}, {x}, CapMethod::Exact, r);
    CHECK(ex.value == doctest::Approx(oracle).epsilon(0.01));
    CapacityOptions o;
    o.r_esc = 12;
    o.samples_per_site = 200000;
    auto mc = chi_tilde({kOrigin}, {x}, CapMethod::MC, r, o);
    CHECK(std::abs(mc.value - ex.value) < 4 * mc.stderr_ + 2e-3);
}

TEST_CASE("decomposition: disjoint sets have zero epsilon at each radius") {
    RngStream r(8);
    for (int trial = 0; trial < 5; ++trial) {
        auto A = random_set(r, 5, 5), B = random_set(r, 5, 5);
        if (!set_intersection(A, B).empty()) continue;
        auto d = decomposition_check(A, B);
        CHECK(std::abs(d.epsilon_small) < 1e-6);  // solver residual 1e-10 times R^2
        CHECK(std::abs(d.epsilon_large) < 1e-6);
        CHECK(d.within_bounds);
        CHECK(d.cap_intersection == 0.0);
    }
}

TEST_CASE("decomposition: A = B and overlapping sets respect the bound") {
    RngStream r(9);
    auto A = random_set(r, 6, 3);
    auto d = decomposition_check(A, A);
    CHECK(d.epsilon == doctest::Approx(d.cap_a).epsilon(1e-8));
    CHECK(d.epsilon == doctest::Approx(d.cap_intersection).epsilon(1e-8));
    CHECK(d.within_bounds);
    for (int trial = 0; trial < 5; ++trial) {
        auto X = random_set(r, 8, 2), Y = random_set(r, 8, 2);
        auto e = decomposition_check(X, Y);
        CHECK(e.within_bounds);
        CHECK(e.epsilon_small >= -1e-8);
        CHECK(e.epsilon_small <= KilledWalkSolution(set_intersection(X, Y), e.radius_small).capacity() + 1e-8);
    }
    CapacityOptions big;
    big.exact_max_diameter = 4;
    CHECK_THROWS(decomposition_check({kOrigin}, {Point{10, 0, 0, 0}}, big));
}
