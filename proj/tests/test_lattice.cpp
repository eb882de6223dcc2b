#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "ust4/lattice.hpp"
#include "ust4/rng.hpp"
#include "ust4/stats.hpp"

using namespace ust4;

namespace {

// Escape probability from the origin for the walk killed on leaving Lambda_R.
double dirichlet_escape(std::int64_t R) {
    auto h = dirichlet_solve(Box{R, true}, {kOrigin}, 1.0);
    double e = 0.0;
    for (const auto& q : neighbors(kOrigin)) e += h.at(q);
    return e / kDegree;
}

}  // namespace

TEST_CASE("philox known-answer vectors") {
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) ==
          std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("rng streams are reproducible and distinct") {
    RngStream a(42, 7), b(42, 7), c(42, 8);
    bool differ = false;
    for (int i = 0; i < 100; ++i) {
        auto x = a(), y = b(), z = c();
        CHECK(x == y);
        differ |= (x != z);
    }
    CHECK(differ);
    RngStream s1 = RngStream(1, 0).split(3), s2 = RngStream(1, 0).split(3);
    CHECK(s1() == s2());
    CHECK(hash64(1, 2) == hash64(1, 2));
    CHECK(hash64(1, 2) != hash64(1, 3));
}

TEST_CASE("rng uniform helpers") {
    RngStream r(5);
    std::vector<double> counts(7, 0.0);
    for (int i = 0; i < 70000; ++i) counts[r.below(7)] += 1;
    CHECK(chi_square_test(counts, std::vector<double>(7, 10000.0)).p_value > 0.001);
    MeanVar u;
    for (int i = 0; i < 100000; ++i) u.add(r.uniform());
    CHECK(std::abs(u.mean() - 0.5) < 4 * u.stderr_());
    MeanVar pois;
    for (int i = 0; i < 20000; ++i) pois.add(static_cast<double>(r.poisson(3.5)));
    CHECK(std::abs(pois.mean() - 3.5) < 4 * pois.stderr_());
}

TEST_CASE("neighbors: order, adjacency symmetry, unit distance") {
    auto nb = neighbors(kOrigin);
    CHECK(nb[0] == Point{1, 0, 0, 0});
    CHECK(nb[1] == Point{-1, 0, 0, 0});
    CHECK(nb[6] == Point{0, 0, 0, 1});
    CHECK(nb[7] == Point{0, 0, 0, -1});
    RngStream r(1);
    for (int i = 0; i < 200; ++i) {
        Point p{static_cast<std::int64_t>(r.below(100)) - 50, static_cast<std::int64_t>(r.below(100)) - 50,
                static_cast<std::int64_t>(r.below(100)) - 50, static_cast<std::int64_t>(r.below(100)) - 50};
        for (const auto& q : neighbors(p)) {
            CHECK(norm2(q - p) == doctest::Approx(1.0));
            auto back = neighbors(q);
            CHECK(std::find(back.begin(), back.end(), p) != back.end());
        }
        std::set<Point> distinct(nb.begin(), nb.end());
        CHECK(distinct.size() == 8);
    }
    CHECK(direction_between(kOrigin, unit(5)) == 5);
    CHECK(direction_between(kOrigin, Point{1, 1, 0, 0}) == -1);
}

TEST_CASE("neighbors: overflow is reported") {
    Point p{std::numeric_limits<std::int64_t>::max(), 0, 0, 0};
    CHECK_THROWS_AS(neighbors(p), std::overflow_error);
}

TEST_CASE("packed keys round-trip and step consistently") {
    RngStream r(3);
    for (int i = 0; i < 1000; ++i) {
        Point p{static_cast<std::int64_t>(r.below(60000)) - 30000, static_cast<std::int64_t>(r.below(60000)) - 30000,
                static_cast<std::int64_t>(r.below(60000)) - 30000, static_cast<std::int64_t>(r.below(60000)) - 30000};
        CHECK(unpack(pack(p)) == p);
        int d = static_cast<int>(r.below(8));
        CHECK(pack_step(pack(p), d) == pack(step(p, d)));
    }
}

TEST_CASE("box indexing") {
    Box b{2, true};
    CHECK(b.volume() == 625);
    for (std::int64_t i = 0; i < b.volume(); ++i) CHECK(b.index(b.site(i)) == i);
    CHECK(b.contains(Point{2, -2, 0, 1}));
    CHECK_FALSE(b.contains(Point{3, 0, 0, 0}));
}

TEST_CASE("dirichlet: trivial solutions") {
    Box b{3, true};
    auto h = dirichlet_solve(b, {}, 1.0);
    for (double v : h.data()) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
    std::vector<Point> all;
    for (std::int64_t i = 0; i < b.volume(); ++i) all.push_back(b.site(i));
    auto z = dirichlet_solve(b, all, 1.0);
    for (std::int64_t i = 0; i < b.volume(); ++i) CHECK(z.at(b.site(i)) == 0.0);
}

TEST_CASE("dirichlet: linear boundary data gives the gambler's-ruin line") {
    // P_x(exit through the face x0 = R+1) is not linear, but the harmonic
    // extension of a linear function is the function itself.
    const std::int64_t R = 5;
    Box b{R, true};
    auto h = dirichlet_solve(b, {}, [R](const Point& p) { return static_cast<double>(p[0] + R + 1) / (2 * R + 2); });
    for (std::int64_t i = 0; i < b.volume(); ++i) {
        Point p = b.site(i);
        CHECK(h.at(p) == doctest::Approx(static_cast<double>(p[0] + R + 1) / (2 * R + 2)).epsilon(1e-8));
    }
}

TEST_CASE("dirichlet: mean-value property at every free site") {
    Box b{6, true};
    std::vector<Point> A{kOrigin, Point{1, 0, 0, 0}, Point{0, 2, -1, 0}};
    auto h = dirichlet_solve(b, A, 1.0);
    CHECK(dirichlet_residual(h, b, A) <= 1e-10);
    for (std::int64_t i = 0; i < b.volume(); ++i) {
        Point p = b.site(i);
        if (std::find(A.begin(), A.end(), p) != A.end()) {
            CHECK(h.at(p) == 0.0);
            continue;
        }
        double m = 0;
        for (const auto& q : neighbors(p)) m += h.at(q);
        CHECK(std::abs(m / 8 - h.at(p)) <= 1e-10);
        CHECK(h.at(p) >= 0.0);
        CHECK(h.at(p) <= 1.0);
    }
}

TEST_CASE("dirichlet: radius cap and non-convergence diagnostics") {
    CHECK_THROWS_AS(dirichlet_solve(Box{49, true}, {}, 1.0), std::invalid_argument);
    DirichletOptions opt;
    opt.max_iterations = 1;
    opt.tolerance = 1e-300;
    CHECK_THROWS_AS(dirichlet_solve(Box{4, true}, {kOrigin}, 1.0, {}, opt), DirichletError);
}

TEST_CASE("dirichlet: Z^4 escape probability converges like 1/R^2") {
    double e8 = dirichlet_escape(8), e16 = dirichlet_escape(16);
    double extrapolated = (4 * e16 - e8) / 3;
    // Known return probability of the Z^4 walk: 0.193206.
    CHECK(extrapolated == doctest::Approx(1 - 0.193206).epsilon(1e-4));
    CHECK(e8 > e16);
}

TEST_CASE("green: symmetry, value at origin, and inverse-square decay") {
    RngStream r(11);
    auto g0 = green_estimate(kOrigin, 20000, 4000, r);
    // Oracle: G(0) = 1 / P(escape) from the Dirichlet solver.
    double e8 = dirichlet_escape(8), e16 = dirichlet_escape(16);
    double g0_oracle = 1.0 / ((4 * e16 - e8) / 3);
    CHECK(g0_oracle == doctest::Approx(1.2394).epsilon(2e-4));
    CHECK(std::abs(g0.value - g0_oracle) < 3 * g0.stderr_ + g0.truncation_bound);

    Point x{2, 1, 0, 0};
    RngStream ra(12), rb(13);
    auto gp = green_estimate(x, 40000, 2000, ra);
    auto gm = green_estimate(-x, 40000, 2000, rb);
    CHECK(std::abs(gp.value - gm.value) < 3 * std::hypot(gp.stderr_, gm.stderr_));

    for (std::int64_t d : {4, 8, 16}) {
        RngStream rd(100 + static_cast<std::uint64_t>(d));
        auto g = green_estimate(Point{d, 0, 0, 0}, 40000, static_cast<std::uint64_t>(40 * d * d), rd);
        double scaled = g.value * static_cast<double>(d * d + 1);
        CHECK(scaled > 0.1);
        CHECK(scaled < 0.4);
    }
}

TEST_CASE("green: bit-reproducible for the same stream") {
    RngStream a(9, 1), b(9, 1);
    auto ga = green_estimate(Point{1, 0, 0, 0}, 500, 500, a);
    auto gb = green_estimate(Point{1, 0, 0, 0}, 500, 500, b);
    CHECK(ga.value == gb.value);
    CHECK(ga.stderr_ == gb.stderr_);
}
