#include <cmath>

#include "doctest.h"
#include "ust4/experiments.hpp"
#include "ust4/forest.hpp"

using namespace ust4;

TEST_CASE("polylog_fit recovers the exponent of an exact curve") {
    for (double b : {-1.0, 0.5, 1.0, 2.0})
        for (double a : {-0.5, 1.0 / 3.0, 2.0}) {
            std::vector<double> n, y;
            for (double m = 16; m <= 4096; m *= 2) {
                n.push_back(m);
                y.push_back(3.0 * std::pow(m, -b) * std::pow(std::log(m), a));
            }
            auto f = polylog_fit(n, y, b);
            CHECK(f.a == doctest::Approx(a).epsilon(1e-9));
            CHECK(std::exp(f.intercept) == doctest::Approx(3.0).epsilon(1e-9));
            CHECK(f.points == n.size());
        }
    CHECK_THROWS(polylog_fit(std::vector<double>{2.0}, std::vector<double>{1.0}, 1.0));
    CHECK_THROWS(polylog_fit(std::vector<double>{2.0, 4.0}, std::vector<double>{1.0, 0.0}, 1.0));
}

TEST_CASE("TailCurve: counts, intervals, flags and monotonicity") {
    std::vector<double> values;
    for (int v = 1; v <= 1000; ++v) values.push_back(v);
    auto c = TailCurve::from_values("x", values, {1, 500, 951, 2000}, 7);
    REQUIRE(c.points.size() == 4);
    CHECK(c.points[0].successes == 1000);
    CHECK(c.points[1].successes == 501);
    CHECK(c.points[2].successes == 50);
    CHECK(c.points[3].successes == 0);
    CHECK_FALSE(c.points[2].flagged);
    CHECK(c.points[3].flagged);
    CHECK(c.points[1].radius == 7);
    for (const auto& p : c.points) {
        CHECK(p.ci.lo <= p.p_hat);
        CHECK(p.p_hat <= p.ci.hi);
    }
    CHECK(c.monotone_within_ci());
    TailCurve up;
    up.add_point(1, 100, 1000);
    up.add_point(2, 300, 1000);
    CHECK_FALSE(up.monotone_within_ci());
    // Fit drops n <= 1 and the flagged points.
    CHECK(polylog_fit(c, 1.0).points == 2);
}

TEST_CASE("box_radius_policy and default grids") {
    CHECK(box_radius_policy(16) == 32);
    // 256 (ln 256)^{1/3} ~ 453.5, sqrt ~ 21.3.
    CHECK(box_radius_policy(256) == 88);
    CHECK(box_radius_policy(256, 2.0) == 176);
    CHECK(one_arm_grid() == std::vector<double>{16, 32, 64, 128, 256});
    CHECK(extrinsic_grid() == std::vector<double>{4, 8, 16, 32});
    CHECK(volume_grid().back() == 4096);
    CHECK(ball_grid().size() == 6);
}

TEST_CASE("run_samples is independent of the worker count and honours the deadline") {
    LerwScalingOptions o;
    o.grid = {64, 256};
    o.samples = 40;
    RunContext one(11, 1), three(11, 3);
    auto a = lerw_scaling(o, one), b = lerw_scaling(o, three);
    REQUIRE(a.size() == 2);
    for (std::size_t g = 0; g < 2; ++g) {
        CHECK(a[g].ratio.mean() == b[g].ratio.mean());
        CHECK(a[g].q50 == b[g].q50);
        CHECK(a[g].rho_at_most_n);
    }
    RunContext late(11, 1);
    late.set_budget(0);
    auto c = run_samples<int>(10, 0, late, [](std::uint64_t i, RngStream&) { return static_cast<int>(i); });
    CHECK(c.empty());
    CHECK(late.partial);
}

TEST_CASE("nonintersection with n = 0 is the escape probability from the origin") {
    NonintersectionOptions o;
    o.grid = {0};
    o.samples = 20000;
    RunContext ctx(3, 1);
    auto rows = nonintersection(o, ctx);
    REQUIRE(rows.size() == 1);
    const double esc = 0.806794, se = std::sqrt(esc * (1 - esc) / 20000);
    MESSAGE("p_R " << rows[0].at_r.p_hat << " p_2R " << rows[0].at_2r.p_hat << " extrapolated " << rows[0].extrapolated);
    CHECK(rows[0].at_r.p_hat >= rows[0].at_2r.p_hat);
    CHECK(std::abs(rows[0].extrapolated - esc) < 5 * se);
    auto m = conditional_moment(1, o, ctx);
    CHECK(std::abs(m[0].moment.mean() - esc) < 5 * se);
    auto m2 = conditional_moment(2, o, ctx);
    CHECK(m2[0].moment.mean() < m[0].moment.mean());
    CHECK_THROWS(conditional_moment(0, o, ctx));
}

TEST_CASE("nonintersection decreases with n") {
    NonintersectionOptions o;
    o.grid = {16, 1024};
    o.samples = 1500;
    auto rows = nonintersection(o, RunContext(4, 1));
    CHECK(rows[1].at_2r.p_hat < rows[0].at_2r.p_hat);
    CHECK(rows[1].truncation_radius.mean() > rows[0].truncation_radius.mean());
}

TEST_CASE("capacity_scaling: small runs give positive ratios") {
    CapacityScalingOptions o;
    o.grid = {64};
    o.samples = 6;
    o.site_draws = 100;
    o.infinite_le = true;
    auto rows = capacity_scaling(o, RunContext(5, 1));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].cap_walk.count() == 6);
    CHECK(rows[0].cap_walk.mean() > 0);
    CHECK(rows[0].cap_le.mean() > 0);
    CHECK(rows[0].cap_le_inf.count() == 6);
    CHECK(rows[0].ratio.mean() > 0);
    CHECK(rows[0].min_ratio > 0);
}

TEST_CASE("past tails and ball volumes on small grids") {
    PastTailOptions o;
    o.grid = {2, 4, 8};
    o.samples = 400;
    RunContext ctx(6, 1);
    auto r = one_arm(o, ctx);
    REQUIRE(r.curve.points.size() == 3);
    CHECK(r.curve.monotone_within_ci());
    CHECK(r.curve.points[0].radius == 32);
    o.model = PastModel::ZeroWired;
    auto z = volume_tail(o, ctx);
    CHECK(z.curve.points[0].p_hat >= z.curve.points[2].p_hat);
    auto e = extrinsic_tail(o, ctx);
    CHECK(e.curve.points[0].p_hat >= e.curve.points[2].p_hat);

    BallVolumeOptions b;
    b.max_depth = 6;
    b.box_radius = 16;
    b.samples = 200;
    auto rows = ball_volumes(b, ctx);
    REQUIRE(rows.size() == 7);
    CHECK(rows[0].ball.mean() == 1.0);
    for (std::size_t n = 1; n < rows.size(); ++n) CHECK(rows[n].ball.mean() >= rows[n - 1].ball.mean());
}

TEST_CASE("box_intersection and ust_box_count on small boxes") {
    BoxIntersectionOptions o;
    o.grid = {4, 8};
    o.samples = 300;
    RunContext ctx(7, 1);
    auto rows = box_intersection(o, ctx);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
        CHECK(r.i_r.mean() > 0);
        CHECK(r.i_r_sq.mean() >= r.i_r.mean() * r.i_r.mean());
        CHECK(r.hit.p_hat > 0);
        CHECK(r.tail_bound == doctest::Approx(1.0 / 16));
    }

    UstBoxCountOptions u;
    u.grid = {2, 3};
    u.samples = 10;
    auto c = ust_box_count(u, ctx);
    REQUIRE(c.size() == 2);
    CHECK(c[0].count.mean() >= 1);
    CHECK(c[0].count.mean() <= 625);
    CHECK(c[1].count.mean() <= 2401);
}

TEST_CASE("ust_box_count matches a count on the full wired tree") {
    // Oracle: dense Wilson on the whole box and the explicit tree path x -> 0.
    const std::int64_t r = 2, factor = 4;
    const Region box = Region::box(factor * r);
    const Region inner = Region::box(r);
    RngStream rng(99);
    MeanVar oracle;
    for (int s = 0; s < 300; ++s) {
        auto f = wilson_wired(box, rng);
        double count = 0;
        for (const auto& x : inner.sites()) {
            auto path = f.tree_path(x, kOrigin);
            if (!path) continue;
            bool inside = true;
            for (const auto& p : path->sites) inside = inside && inner.contains(p);
            if (inside) count += 1;
        }
        oracle.add(count);
    }
    UstBoxCountOptions o;
    o.grid = {r};
    o.samples = 300;
    o.box_factor = factor;
    auto rows = ust_box_count(o, RunContext(5, 1));
    REQUIRE(rows.size() == 1);
    const double se = std::hypot(oracle.stderr_(), rows[0].count.stderr_());
    CHECK(std::abs(rows[0].count.mean() - oracle.mean()) <= 4 * se);
}

TEST_CASE("avalanche_tails: multiset dominates the cluster") {
    AvalancheTailOptions o;
    o.box_radius = 3;
    o.size_grid = {1, 4, 16};
    o.radius_grid = {0, 1, 2};
    o.samples = 300;
    auto r = avalanche_tails(o, RunContext(8, 1));
    CHECK(r.multiset_dominates);
    CHECK(r.cluster.monotone_within_ci());
    for (std::size_t i = 0; i < r.cluster.points.size(); ++i)
        CHECK(r.topplings.points[i].successes >= r.cluster.points[i].successes);
    CHECK(r.radius.points[0].successes + r.empty == 300);
}

TEST_CASE("weakl1_time_check: late short fraction decreases in m") {
    WeakL1Options o;
    o.lengths = {8};
    o.multipliers = {1, 4, 16};
    o.samples = 3000;
    o.escape_radius = 32;
    o.horizon = 1 << 14;
    auto rows = weakl1_time_check(o, RunContext(9, 1));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].hits > 0);
    CHECK(rows[0].short_le > 0);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].short_and_late <= rows[i - 1].short_and_late);
    CHECK(rows[0].p_late_short <= rows[0].p_short);
}

TEST_CASE("fit_calibration: exact fits are exact") {
    FitCalibrationOptions o;
    o.replicates = 10;
    auto rows = fit_calibration(o, RunContext(10, 1));
    CHECK(rows.size() == 12);
    for (const auto& r : rows) {
        CHECK(r.a_exact == doctest::Approx(r.a_true).epsilon(1e-9));
        CHECK(r.a_q10 <= r.a_median);
        CHECK(r.a_median <= r.a_q90);
    }
}
