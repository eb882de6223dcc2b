#include <cmath>

#include "doctest.h"
#include "ust4/forest.hpp"
#include "ust4/interlace.hpp"
#include "ust4/orbits.hpp"
#include "ust4/stats.hpp"

using namespace ust4;

namespace {

const Point e0{1, 0, 0, 0}, e1{0, 1, 0, 0};

CapacityEstimate exact_cap(const std::vector<Point>& K) {
    RngStream r(0);
    return capacity(K, CapMethod::Exact, r);
}

std::vector<Point> box_sites(std::int64_t R) { return Region::box(R).sites(); }

}  // namespace

TEST_CASE("empty window has no trajectories") {
    RngStream r(1);
    auto w = sample_interlacement({kOrigin}, 2.0, 2.0, exact_cap({kOrigin}), r);
    CHECK(w.trajectories.empty());
    CHECK(w.r_traj == 64);
    CHECK_THROWS(sample_interlacement({kOrigin}, 2.0, 1.0, exact_cap({kOrigin}), r));
}

TEST_CASE("counts are Poisson with rate (t1 - t0) cap") {
    RngStream r(2);
    auto cap = exact_cap({kOrigin});
    CHECK(cap.value == doctest::Approx(6.454).epsilon(1e-3));
    InterlacementOptions o;
    o.r_traj = 8;
    const double dt = 0.5;
    const int windows = 10000;
    std::vector<double> obs(40, 0.0);
    MeanVar m;
    for (int i = 0; i < windows; ++i) {
        auto w = sample_interlacement({kOrigin}, 0.0, dt, cap, r, o);
        for (const auto& tr : w.trajectories) CHECK(tr.entry == kOrigin);
        for (std::size_t j = 1; j < w.trajectories.size(); ++j)
            CHECK(w.trajectories[j - 1].arrival_time <= w.trajectories[j].arrival_time);
        obs[std::min<std::size_t>(w.trajectories.size(), 39)] += 1;
        m.add(static_cast<double>(w.trajectories.size()));
    }
    const double lambda = dt * cap.value;
    std::vector<double> expected(40);
    double tail = 1.0;
    for (std::size_t k = 0; k < 39; ++k) {
        expected[k] = windows * std::exp(-lambda + static_cast<double>(k) * std::log(lambda) - std::lgamma(k + 1.0));
        tail -= expected[k] / windows;
    }
    expected[39] = windows * tail;
    CHECK(chi_square_test(obs, expected).p_value > 0.01);
    CHECK(std::abs(m.mean() - lambda) < 3 * m.stderr_());
}

TEST_CASE("entry points follow the killed harmonic measure; backward walks avoid K") {
    RngStream r(3);
    std::vector<Point> K{kOrigin, e0, Point{0, 3, 0, 0}};
    InterlacementOptions o;
    o.r_traj = 12;
    o.keep_paths = true;
    KilledWalkSolution exact(K, o.r_traj);
    std::vector<double> esc;
    double total = 0;
    for (const auto& x : normalize_set(K)) {
        esc.push_back(exact.escape(x));
        total += esc.back();
    }
    CapacityEstimate cap;
    cap.value = 8 * total;
    std::vector<double> counts(3, 0.0);
    auto sorted = normalize_set(K);
    int n = 0;
    PointSet Kset(K.begin(), K.end());
    for (int i = 0; i < 3000; ++i) {
        auto w = sample_interlacement(K, 0.0, 1.0, cap, r, o);
        for (const auto& tr : w.trajectories) {
            ++n;
            counts[static_cast<std::size_t>(std::find(sorted.begin(), sorted.end(), tr.entry) - sorted.begin())] += 1;
            CHECK(tr.backward.front() == tr.entry);
            CHECK(tr.forward.front() == tr.entry);
            CHECK(tr.backward.is_nearest_neighbor());
            CHECK(tr.forward.is_nearest_neighbor());
            for (std::size_t k = 1; k < tr.backward.sites.size(); ++k) CHECK_FALSE(Kset.contains(tr.backward[k]));
            CHECK(norm_inf(tr.backward.back()) == o.r_traj + 1);
            CHECK(norm_inf(tr.forward.back()) == o.r_traj + 1);
            REQUIRE(!tr.visits.empty());
            CHECK(tr.visits[0].site == tr.entry);
            CHECK(tr.visits[0].previous == tr.backward[1]);
            // Each later first visit is the first occurrence of that site in the forward path.
            for (std::size_t v = 1; v < tr.visits.size(); ++v) {
                auto it = std::find(tr.forward.sites.begin(), tr.forward.sites.end(), tr.visits[v].site);
                REQUIRE(it != tr.forward.sites.end());
                CHECK(*(it - 1) == tr.visits[v].previous);
            }
        }
    }
    std::vector<double> expected;
    for (double e : esc) expected.push_back(n * e / total);
    CHECK(chi_square_test(counts, expected).p_value > 0.01);
    for (std::size_t i = 0; i < 3; ++i) {
        double p = esc[i] / total;
        CHECK(std::abs(counts[i] / n - p) < 3 * std::sqrt(p * (1 - p) / n));
    }
}

TEST_CASE("aldous_broder_window: singleton K and coverage protocol") {
    RngStream r(4);
    InterlacementOptions o;
    o.r_traj = 10;
    o.keep_paths = true;
    auto w = sample_interlacement({kOrigin}, 0.0, 1.0, exact_cap({kOrigin}), r, o);
    extend_until_covered(w, 0.0, r, o);
    auto f = aldous_broder_window(w, 0.0);
    REQUIRE(f.complete());
    const auto& first = w.trajectories[static_cast<std::size_t>(f.source[0])];
    CHECK(f.parent_dir[0] == direction_between(kOrigin, first.backward[1]));
    auto g = aldous_broder_window(w, w.t1 + 1.0);
    CHECK_FALSE(g.complete());
    CHECK(g.uncovered.size() == 1);
}

TEST_CASE("aldous_broder_window: later reference times only change re-hit sites") {
    RngStream r(5);
    auto K = box_sites(1);
    InterlacementOptions o;
    o.r_traj = 10;
    RngStream rc(50);
    CapacityOptions co;
    co.r_esc = 10;
    co.samples_per_site = 2000;
    auto cap = capacity(K, CapMethod::MC, rc, co);
    for (int i = 0; i < 20; ++i) {
        auto w = sample_interlacement(K, 0.0, 2.0, cap, r, o);
        extend_until_covered(w, 1.0, r, o);
        auto a = aldous_broder_window(w, 0.0), b = aldous_broder_window(w, 1.0);
        PointSet hit;
        for (const auto& tr : w.trajectories)
            if (tr.arrival_time < 1.0)
                for (const auto& v : tr.visits) hit.insert(v.site);
        for (std::size_t k = 0; k < K.size(); ++k)
            if (a.parent_dir[k] != b.parent_dir[k]) CHECK(hit.contains(a.K[k]));
    }
}

TEST_CASE("aldous_broder_window: edge marginals match the wired UST of the killing box") {
    RngStream r(6);
    auto K = box_sites(1);
    const std::int64_t R = 10;
    InterlacementOptions o;
    o.r_traj = R;
    RngStream rc(60);
    CapacityOptions co;
    co.r_esc = 10;
    co.samples_per_site = 2000;
    auto cap = capacity(K, CapMethod::MC, rc, co);
    OrbitMarginals ab, wil;
    for (int i = 0; i < 3000; ++i) {
        auto w = sample_interlacement(K, 0.0, 0.0, cap, r, o);
        extend_until_covered(w, 0.0, r, o);
        auto f = aldous_broder_window(w, 0.0);
        REQUIRE(f.complete());
        ab.add(f.K, f.parent_dir);
        wil.add(K, wilson_partial(K, R, r));
    }
    CHECK(max_orbit_z(ab, wil) < 3.0);
}

TEST_CASE("past dynamics: identity on sampled triples") {
    RngStream r(7);
    auto K = box_sites(2);
    InterlacementOptions o;
    o.r_traj = 16;
    RngStream rc(70);
    CapacityOptions co;
    co.r_esc = 16;
    co.site_draws = 20000;
    auto cap = capacity(K, CapMethod::MC, rc, co);
    int holds = 0, skipped = 0, fails = 0;
    for (int win = 0; win < 10; ++win) {
        auto w = sample_interlacement(K, 0.0, 10.0, cap, r, o);
        for (int k = 0; k < 100; ++k) {
            double s = 10.0 * r.uniform(), t = s + 0.2 * r.uniform() + 1e-9;
            const Point& v = K[r.below(K.size())];
            switch (past_dynamics_check(w, s, t, v)) {
                case PastDynamics::Holds: ++holds; break;
                case PastDynamics::Skipped: ++skipped; break;
                case PastDynamics::Fails: ++fails; break;
            }
        }
        // No arrivals in [s, t): identical pasts.
        CHECK(past_dynamics_check(w, 20.0, 21.0, kOrigin) == PastDynamics::Holds);
        CHECK(restricted_past(aldous_broder_window(w, 20.0), kOrigin) ==
              restricted_past(aldous_broder_window(w, 21.0), kOrigin));
    }
    CHECK(fails == 0);
    CHECK(holds > 300);
    MESSAGE("holds " << holds << " skipped " << skipped);
}

TEST_CASE("past dynamics: hitting everything but v isolates v") {
    // K = {0, e0, 2e0}. A trajectory in [0, 1) hits e0 and 2e0; one after 1 hits all three along the axis.
    WindowInterlacement w;
    w.K = {kOrigin, e0, Point{2, 0, 0, 0}};
    w.K = normalize_set(w.K);
    w.t0 = 0;
    w.t1 = 2;
    Trajectory a;
    a.arrival_time = 0.5;
    a.entry = e0;
    a.visits = {{e0, e0 + e1}, {Point{2, 0, 0, 0}, Point{2, 1, 0, 0}}};
    Trajectory b;
    b.arrival_time = 1.5;
    b.entry = kOrigin;
    b.visits = {{kOrigin, -e0}, {e0, kOrigin}, {Point{2, 0, 0, 0}, e0}};
    w.trajectories = {a, b};
    auto at1 = restricted_past(aldous_broder_window(w, 1.0), kOrigin);
    CHECK(at1.size() == 3);
    CHECK(restricted_past(aldous_broder_window(w, 0.0), kOrigin) == std::vector<Point>{kOrigin});
    CHECK(past_dynamics_check(w, 0.0, 1.0, kOrigin) == PastDynamics::Holds);
    CHECK(past_dynamics_check(w, 0.0, 1.0, e0) == PastDynamics::Skipped);
}

TEST_CASE("thinning: the restriction to a sub-window is a fresh sample") {
    RngStream r(8);
    std::vector<Point> K{kOrigin, e0};
    auto cap = exact_cap(K);
    InterlacementOptions o;
    o.r_traj = 8;
    MeanVar sub, fresh;
    std::vector<double> ea(2, 0), eb(2, 0);
    for (int i = 0; i < 5000; ++i) {
        auto w = sample_interlacement(K, 0.0, 1.0, cap, r, o);
        double c = 0;
        for (const auto& tr : w.trajectories)
            if (tr.arrival_time <= 0.3) {
                c += 1;
                ea[tr.entry == kOrigin ? 0 : 1] += 1;
            }
        sub.add(c);
        auto f = sample_interlacement(K, 0.0, 0.3, cap, r, o);
        fresh.add(static_cast<double>(f.trajectories.size()));
        for (const auto& tr : f.trajectories) eb[tr.entry == kOrigin ? 0 : 1] += 1;
    }
    CHECK(std::abs(sub.mean() - fresh.mean()) < 3 * std::hypot(sub.stderr_(), fresh.stderr_()));
    CHECK(std::abs(sub.variance() - fresh.variance()) < 0.1 * fresh.variance());
    double pa = ea[0] / (ea[0] + ea[1]), pb = eb[0] / (eb[0] + eb[1]);
    CHECK(std::abs(pa - pb) < 3 * std::sqrt(pa * (1 - pa) / (ea[0] + ea[1]) + pb * (1 - pb) / (eb[0] + eb[1])));
}
