#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ust4/parallel.hpp"
#include "ust4/stats.hpp"

namespace ust4 {

// ---------------------------------------------------------------------------
// Tail curves and polylog fits

/// Points with fewer successes than this are flagged and left out of fits.
inline constexpr std::uint64_t kMinSuccesses = 50;

struct TailPoint {
    double n = 0;
    std::uint64_t successes = 0, samples = 0;
    double p_hat = 0;
    Interval ci;
    bool flagged = false;
    /// Box radius or truncation used for this point (0 if not applicable).
    std::int64_t radius = 0;
};

struct TailCurve {
    std::string quantity;
    std::vector<TailPoint> points;

    /// P(value >= n) for each n of the grid, from one sample of values.
    static TailCurve from_values(std::string quantity, const std::vector<double>& values,
                                 const std::vector<double>& grid, std::int64_t radius = 0);
    void add_point(double n, std::uint64_t successes, std::uint64_t samples, std::int64_t radius = 0);
    /// True if every point lies within the CI of every earlier point or below it.
    bool monotone_within_ci() const;
};

/// Fit of log(n^b y) = a log log n + c with the polynomial power b fixed.
struct PolylogFit {
    double b = 0, a = 0, intercept = 0, r2 = 0;
    std::vector<double> residuals;
    std::size_t points = 0;
};

/// Unweighted unless weights are given (one per point).
PolylogFit polylog_fit(const std::vector<double>& n, const std::vector<double>& y, double b,
                       const std::vector<double>& weights = {});
/// Fit on the unflagged points of a curve, weighted by successes / (1 - p_hat).
PolylogFit polylog_fit(const TailCurve& curve, double b);

/// max(32, 4 ceil(sqrt(n (ln n)^{1/3}))), times `scale` (2 for the sensitivity run).
std::int64_t box_radius_policy(double n, double scale = 1.0);

/// Default grids: intrinsic radius 16..256, volume 16..4096, extrinsic radius
/// 4..32, ball depth 16..512 (all dyadic).
std::vector<double> one_arm_grid();
std::vector<double> volume_grid();
std::vector<double> extrinsic_grid();
std::vector<double> ball_grid();

// ---------------------------------------------------------------------------
// Loop-erasure length

struct LerwScalingOptions {
    std::vector<std::uint64_t> grid{1 << 10, 1 << 12, 1 << 14, 1 << 16};
    std::uint64_t samples = 1000;
    /// The infinite loop-erasure is read off a walk of horizon_factor * max(grid) steps.
    double horizon_factor = 2.0;
    double deviation = 0.5;
};

struct LerwScalingRow {
    std::uint64_t n = 0;
    /// rho_n / (n (ln n)^{-1/3}).
    MeanVar ratio;
    double q10 = 0, q50 = 0, q90 = 0;
    /// Fraction with |ratio - 1| > deviation.
    double deviation_freq = 0;
    bool rho_at_most_n = true;
};

std::vector<LerwScalingRow> lerw_scaling(const LerwScalingOptions& opt, const RunContext& ctx);

// ---------------------------------------------------------------------------
// Capacity of walks and loop-erasures

struct CapacityScalingOptions {
    std::vector<std::uint64_t> grid{1 << 10, 1 << 12, 1 << 14, 1 << 16};
    std::uint64_t samples = 50;
    /// Escape walks per capacity estimate (sites drawn uniformly).
    std::uint64_t site_draws = 200;
    /// Also estimate cap(LE(X)^n), the first n points of the infinite loop-erasure.
    bool infinite_le = false;
    /// Upper-tail threshold C n / (ln n)^{2/3} for cap(LE(X)^n).
    double upper_tail_c = 1.0;
    /// Lower-tail threshold c n / ln n for cap(LE(X)^n).
    double lower_tail_c = 0.25;
};

struct CapacityScalingRow {
    std::uint64_t n = 0;
    MeanVar cap_walk, cap_le, cap_le_inf;
    /// cap(X^n) ln n / n.
    MeanVar walk_normalized;
    /// cap(LE(X^n)) / cap(X^n) per sample.
    MeanVar ratio;
    double min_ratio = 1;
    /// Samples where the loop-erasure capacity estimate exceeded the walk's.
    std::uint64_t ratio_above_one = 0;
    std::uint64_t upper_tail = 0, lower_tail = 0;
};

std::vector<CapacityScalingRow> capacity_scaling(const CapacityScalingOptions& opt, const RunContext& ctx);

// ---------------------------------------------------------------------------
// Non-intersection of a walk with a loop-erased walk

struct NonintersectionOptions {
    std::vector<std::uint64_t> grid{1 << 8, 1 << 10, 1 << 12, 1 << 14, 1 << 16};
    std::uint64_t samples = 2000;
    /// X is killed on leaving Lambda_{2R}, R = factor * max(8, extent of LE(Y^n)).
    double truncation_factor = 2.0;
};

struct NonintersectionRow {
    std::uint64_t n = 0;
    TailPoint at_r, at_2r;
    /// (4 p_2R - p_R) / 3.
    double extrapolated = 0;
    MeanVar truncation_radius;
};

/// P(X(0, inf) and LE(Y^n) disjoint), X and Y independent walks from 0.
std::vector<NonintersectionRow> nonintersection(const NonintersectionOptions& opt, const RunContext& ctx);

struct ConditionalMomentRow {
    std::uint64_t n = 0;
    int p = 1;
    /// Product of p independent non-intersection indicators given Y (killed at 2R).
    MeanVar moment;
};

/// E[P(X(0, inf) and LE(Y^n) disjoint | Y)^p] by the product-of-indicators estimator.
std::vector<ConditionalMomentRow> conditional_moment(int p, const NonintersectionOptions& opt, const RunContext& ctx);

// ---------------------------------------------------------------------------
// Pasts in the UST and the 0-wired forest

enum class PastModel { UstPast, ZeroWired };
const char* to_string(PastModel m);

struct PastTailOptions {
    PastModel model = PastModel::UstPast;
    /// Empty selects the driver's default grid.
    std::vector<double> grid;
    std::uint64_t samples = 10000;
    double box_scale = 1.0;
};

struct PastTailResult {
    TailCurve curve;
    PolylogFit fit;
};

/// P(rad_int >= n); box radius per n from box_radius_policy, one run per distinct radius.
PastTailResult one_arm(const PastTailOptions& opt, const RunContext& ctx);
/// P(|past| >= n); box radius from box_radius_policy(sqrt n), exploration capped at max(grid) vertices.
PastTailResult volume_tail(const PastTailOptions& opt, const RunContext& ctx);
/// P(rad_ext >= n); box radius max(32, 2n).
PastTailResult extrinsic_tail(const PastTailOptions& opt, const RunContext& ctx);

struct BallVolumeOptions {
    PastModel model = PastModel::UstPast;
    std::uint64_t max_depth = 20;
    std::int64_t box_radius = 80;
    std::uint64_t samples = 10000;
};

struct BallVolumeRow {
    std::uint64_t n = 0;
    /// |boundary of P(0, n)| and |P(0, n)|.
    MeanVar shell, ball;
};

std::vector<BallVolumeRow> ball_volumes(const BallVolumeOptions& opt, const RunContext& ctx);

// ---------------------------------------------------------------------------
// Box intersections

struct BoxIntersectionOptions {
    std::vector<std::int64_t> grid{16, 32, 64, 128, 256, 512};
    std::uint64_t samples = 1000;
    /// Walks are killed on leaving Lambda_{truncation * r}.
    std::int64_t truncation = 4;
};

struct BoxIntersectionRow {
    std::int64_t r = 0;
    MeanVar i_r, i_r_sq;
    TailPoint hit;
    /// (1 / truncation)^2: order of the chance that a killed walk would have come back to Lambda_r.
    double tail_bound = 0;
};

/// I_r = sum_{i,j} 1(X_i = Y_j in Lambda_r), X_0 uniform on Lambda_r, Y_0 = 0.
std::vector<BoxIntersectionRow> box_intersection(const BoxIntersectionOptions& opt, const RunContext& ctx);

struct UstBoxCountOptions {
    std::vector<std::int64_t> grid{4, 8, 16};
    std::uint64_t samples = 20;
    /// Wired box radius as a multiple of r.
    std::int64_t box_factor = 4;
};

struct UstBoxCountRow {
    std::int64_t r = 0;
    /// |{x : tree path from 0 to x inside Lambda_r}|.
    MeanVar count;
    /// count ln r / r^4.
    double normalized = 0;
};

std::vector<UstBoxCountRow> ust_box_count(const UstBoxCountOptions& opt, const RunContext& ctx);

// ---------------------------------------------------------------------------
// Avalanches

struct AvalancheTailOptions {
    std::int64_t box_radius = 10;
    std::vector<double> size_grid{16, 32, 64, 128, 256, 512, 1024, 2048, 4096};
    std::vector<double> radius_grid{1, 2, 3, 4, 5, 6, 8};
    std::uint64_t samples = 10000;
};

struct AvalancheTailResult {
    TailCurve cluster, topplings, radius;
    std::uint64_t empty = 0;
    /// |Av| >= |AvC| on every sample.
    bool multiset_dominates = true;
};

AvalancheTailResult avalanche_tails(const AvalancheTailOptions& opt, const RunContext& ctx);

// ---------------------------------------------------------------------------
// Hitting time against loop-erasure length

struct WeakL1Options {
    std::vector<std::uint64_t> lengths{64};
    std::vector<std::uint64_t> multipliers{1, 2, 4, 8, 16, 32, 64};
    std::uint64_t samples = 20000;
    /// Start of the walk that is run until it hits 0.
    std::int64_t start_distance = 2;
    std::int64_t escape_radius = 256;
    std::uint64_t horizon = 1 << 18;
};

struct WeakL1Row {
    std::uint64_t L = 0, m = 0;
    /// Walks that hit 0 within the horizon.
    std::uint64_t hits = 0;
    /// Among them: |LE| <= L, and |LE| <= L with tau_0 >= m.
    std::uint64_t short_le = 0, short_and_late = 0;
    double p_late_short = 0, p_short = 0;
    /// p_late_short * m / (L ln(L + 1) p_short).
    double fitted_c = 0;
};

std::vector<WeakL1Row> weakl1_time_check(const WeakL1Options& opt, const RunContext& ctx);

// ---------------------------------------------------------------------------
// Fit calibration

struct FitCalibrationRow {
    std::string grid_name;
    double b = 0, a_true = 0;
    /// Fit on the exact curve C n^{-b} (ln n)^{a}.
    double a_exact = 0;
    /// Fits on binomial draws at the experiment's sample size.
    double a_median = 0, a_q10 = 0, a_q90 = 0;
    std::uint64_t replicates = 0;
};

struct FitCalibrationOptions {
    std::vector<double> a_values{1.0 / 6.0, 1.0 / 3.0, 2.0 / 3.0};
    std::uint64_t replicates = 200;
};

std::vector<FitCalibrationRow> fit_calibration(const FitCalibrationOptions& opt, const RunContext& ctx);

}  // namespace ust4
