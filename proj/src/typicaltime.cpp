#include "ust4/typicaltime.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "ust4/flat_map.hpp"

namespace ust4 {

namespace {

/// Bounding box of a point set, for a cheap test before the hash lookup.
struct Bounds {
    std::array<std::int64_t, kDim> lo{}, hi{};

    explicit Bounds(const std::vector<Point>& pts) {
        lo.fill(INT64_MAX);
        hi.fill(INT64_MIN);
        for (const auto& p : pts)
            for (int a = 0; a < kDim; ++a) {
                lo[static_cast<std::size_t>(a)] = std::min(lo[static_cast<std::size_t>(a)], p[a]);
                hi[static_cast<std::size_t>(a)] = std::max(hi[static_cast<std::size_t>(a)], p[a]);
            }
    }
    bool contains(const std::array<std::int64_t, kDim>& c) const {
        for (std::size_t a = 0; a < kDim; ++a)
            if (c[a] < lo[a] || c[a] > hi[a]) return false;
        return true;
    }
};

/// First time t in [1, kmax] at which a walk from `start` lands on a site whose
/// index satisfies `blocked`; kmax + 1 if none.
template <class Blocked>
std::uint64_t first_block(const Point& start, std::uint64_t kmax, const FlatMap<std::uint32_t>& index,
                          const Bounds& box, Blocked blocked, RngStream& rng) {
    std::array<std::int64_t, kDim> c{start[0], start[1], start[2], start[3]};
    for (std::uint64_t t = 1; t <= kmax; ++t) {
        int d = rng.direction();
        c[static_cast<std::size_t>(d >> 1)] += (d & 1) ? -1 : 1;
        if (!box.contains(c)) continue;
        const auto* i = index.find(pack(Point{c[0], c[1], c[2], c[3]}));
        if (i && blocked(*i)) return t;
    }
    return kmax + 1;
}

FlatMap<std::uint32_t> index_of(const std::vector<Point>& pts) {
    FlatMap<std::uint32_t> m(2 * pts.size() + 16);
    for (std::size_t i = 0; i < pts.size(); ++i) m[pack(pts[i])] = static_cast<std::uint32_t>(i);
    return m;
}

void check_path(const LatticePath& eta) {
    if (eta.sites.empty()) throw std::invalid_argument("typical time: empty path");
    for (const auto& p : eta.sites)
        if (!packable(p)) throw std::invalid_argument("typical time: path outside the packable range");
    if (!eta.is_self_avoiding()) throw std::invalid_argument("typical time: path is not self-avoiding");
}

/// Survival counts per column: walks with first block time > k_j.
void add_row(std::uint64_t tau, const std::vector<std::uint64_t>& ks, std::vector<std::uint64_t>& survive) {
    for (std::size_t j = 0; j < ks.size() && ks[j] < tau; ++j) ++survive[j];
}

double harmonic(std::uint64_t m) {
    // H_m by direct summation for small m, asymptotic expansion beyond.
    if (m < 64) {
        double h = 0;
        for (std::uint64_t k = 1; k <= m; ++k) h += 1.0 / static_cast<double>(k);
        return h;
    }
    const double x = static_cast<double>(m);
    return std::log(x) + 0.57721566490153286 + 1 / (2 * x) - 1 / (12 * x * x) + 1 / (120 * x * x * x * x);
}

/// Weight of column j for sums over k in [1, n]: H(min(k_{j+1} - 1, n)) - H(k_j - 1).
std::vector<double> column_weights(const std::vector<std::uint64_t>& ks, std::uint64_t n) {
    std::vector<double> w(ks.size(), 0.0);
    for (std::size_t j = 0; j < ks.size() && ks[j] <= n; ++j) {
        std::uint64_t end = j + 1 < ks.size() ? std::min<std::uint64_t>(ks[j + 1] - 1, n) : n;
        w[j] = harmonic(end) - harmonic(ks[j] - 1);
    }
    return w;
}

std::vector<std::uint64_t> dyadic_up_to(std::uint64_t n) {
    std::vector<std::uint64_t> ks;
    for (std::uint64_t k = 1; k <= std::max<std::uint64_t>(n, 1); k *= 2) ks.push_back(k);
    return ks;
}

}  // namespace

EscEstimate esc_probability(const LatticePath& eta, std::size_t i, std::uint64_t k, std::uint64_t samples,
                            RngStream& rng) {
    check_path(eta);
    if (i > eta.length()) throw std::invalid_argument("esc_probability: i > |eta|");
    if (k < 1) throw std::invalid_argument("esc_probability: k must be >= 1");
    EscEstimate e;
    e.samples = samples;
    if (i == 0 || samples == 0) {
        e.value = 1.0;
        return e;
    }
    auto index = index_of(eta.sites);
    Bounds box(std::vector<Point>(eta.sites.begin(), eta.sites.begin() + static_cast<std::ptrdiff_t>(i)));
    std::uint64_t ok = 0;
    for (std::uint64_t s = 0; s < samples; ++s)
        if (first_block(eta[i], k, index, box, [i](std::uint32_t j) { return j < i; }, rng) > k) ++ok;
    const double p = static_cast<double>(ok) / static_cast<double>(samples);
    e.value = p;
    e.stderr_ = std::sqrt(p * (1 - p) / static_cast<double>(samples));
    return e;
}

EscGrid default_esc_grid(std::size_t n) {
    EscGrid g;
    g.k = dyadic_up_to(n);
    const std::size_t stride = std::max<std::size_t>(1, n / 256);
    for (std::size_t i = 0; i < std::max<std::size_t>(n, 1); i += stride) g.i.push_back(i);
    return g;
}

EscGrid full_esc_grid(std::size_t n) {
    EscGrid g;
    for (std::size_t i = 0; i < std::max<std::size_t>(n, 1); ++i) g.i.push_back(i);
    for (std::uint64_t k = 1; k <= std::max<std::uint64_t>(n, 1); ++k) g.k.push_back(k);
    return g;
}

EscProfile esc_profile(const LatticePath& eta, const EscGrid& grid, std::uint64_t samples, RngStream& rng) {
    check_path(eta);
    if (grid.i.empty() || grid.k.empty() || !std::is_sorted(grid.i.begin(), grid.i.end()) ||
        !std::is_sorted(grid.k.begin(), grid.k.end()) || grid.k.front() < 1 || grid.i.back() > eta.length())
        throw InsufficientProfile("esc_profile: malformed grid");
    EscProfile p;
    p.n = eta.length();
    p.grid = grid;
    p.samples = samples;
    const std::size_t cols = grid.k.size();
    p.value.assign(grid.i.size() * cols, 1.0);
    p.stderr_.assign(grid.i.size() * cols, 0.0);
    auto index = index_of(eta.sites);
    const std::uint64_t kmax = grid.k.back();
    std::vector<std::uint64_t> survive(cols);
    for (std::size_t r = 0; r < grid.i.size(); ++r) {
        const std::size_t i = grid.i[r];
        if (i == 0 || samples == 0) continue;
        RngStream row = rng.split(r);
        Bounds box(std::vector<Point>(eta.sites.begin(), eta.sites.begin() + static_cast<std::ptrdiff_t>(i)));
        std::fill(survive.begin(), survive.end(), 0);
        for (std::uint64_t s = 0; s < samples; ++s)
            add_row(first_block(eta[i], kmax, index, box, [i](std::uint32_t j) { return j < i; }, row), grid.k,
                    survive);
        for (std::size_t j = 0; j < cols; ++j) {
            const double q = static_cast<double>(survive[j]) / static_cast<double>(samples);
            p.value[r * cols + j] = q;
            p.stderr_[r * cols + j] = std::sqrt(q * (1 - q) / static_cast<double>(samples));
        }
    }
    return p;
}

std::vector<double> a_terms(const EscProfile& esc) {
    const std::size_t n = esc.n;
    if (esc.grid.i.empty() || esc.grid.i.front() != 0 || esc.grid.k.empty() || esc.grid.k.front() != 1)
        throw InsufficientProfile("a_terms: grid must start at i = 0 and k = 1");
    const auto w = column_weights(esc.grid.k, n);
    std::vector<double> row_a(esc.grid.i.size(), 0.0);
    for (std::size_t r = 0; r < esc.grid.i.size(); ++r)
        for (std::size_t j = 0; j < esc.grid.k.size(); ++j) row_a[r] += w[j] * esc.at(r, j) * esc.at(r, j);
    std::vector<double> a(n);
    std::size_t r = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (r + 1 < esc.grid.i.size() && esc.grid.i[r + 1] <= i) ++r;
        a[i] = row_a[r];
    }
    return a;
}

double t_tilde(const LatticePath& eta, const EscProfile& esc) {
    if (esc.n != eta.length()) throw InsufficientProfile("t_tilde: profile is for a different path length");
    double t = 0;
    for (double a : a_terms(esc)) t += a;
    return t;
}

bool classify_delta_good(const LatticePath& eta, const EscProfile& esc, double delta) {
    if (esc.n != eta.length()) throw InsufficientProfile("classify_delta_good: profile is for a different path length");
    const double n = static_cast<double>(esc.n);
    // ln n <= 0 for n <= 1 makes the threshold degenerate; such paths have at most one term.
    const double threshold = esc.n >= 2 ? std::pow(std::log(n), 1.0 / 3.0 + delta) : 0.0;
    double big = 0;
    for (double a : a_terms(esc))
        if (a >= threshold) big += a;
    return big <= delta * n;
}

TimeRadius time_radius(const OrientedForest& forest, const Point& origin, std::uint64_t esc_samples,
                       RngStream& rng) {
    if (!forest.region().contains(origin)) throw std::invalid_argument("time_radius: origin outside the region");
    // Past of the origin as a tree: vertex 0 is the origin.
    std::vector<Point> verts{origin};
    std::vector<std::uint32_t> parent{0};
    std::vector<std::uint64_t> depth{0};
    for (std::size_t q = 0; q < verts.size(); ++q)
        for (const auto& c : forest.children(verts[q])) {
            verts.push_back(c);
            parent.push_back(static_cast<std::uint32_t>(q));
            depth.push_back(depth[q] + 1);
        }
    TimeRadius out;
    out.argmax = origin;
    out.past_volume = verts.size();
    out.intrinsic_radius = depth.back();
    if (verts.size() == 1) return out;

    const auto ks = dyadic_up_to(out.intrinsic_radius);
    const std::size_t cols = ks.size();
    auto index = index_of(verts);
    Bounds box(verts);

    // Esc rows: vertex v avoids its strict ancestors. Breadth-first order puts
    // ancestors first, so ancestor tests walk parent pointers.
    std::vector<double> esc2(verts.size() * cols, 1.0);
    std::vector<std::uint64_t> survive(cols);
    std::vector<char> on_path(verts.size(), 0);
    for (std::size_t v = 1; v < verts.size(); ++v) {
        for (std::size_t u = parent[v];; u = parent[u]) {
            on_path[u] = 1;
            if (u == 0) break;
        }
        RngStream row = rng.split(v);
        std::fill(survive.begin(), survive.end(), 0);
        for (std::uint64_t s = 0; s < esc_samples; ++s)
            add_row(first_block(verts[v], ks.back(), index, box, [&](std::uint32_t j) { return on_path[j] != 0; },
                                row),
                    ks, survive);
        for (std::size_t j = 0; j < cols; ++j) {
            const double q = esc_samples ? static_cast<double>(survive[j]) / static_cast<double>(esc_samples) : 1.0;
            esc2[v * cols + j] = q * q;
        }
        for (std::size_t u = parent[v];; u = parent[u]) {
            on_path[u] = 0;
            if (u == 0) break;
        }
    }

    // S_j(x) = sum over strict ancestors y of Esc_{k_j}(y)^2; T(x) = sum_j w_j(depth x) S_j(x).
    std::vector<double> S(verts.size() * cols, 0.0);
    std::vector<std::vector<double>> weights(out.intrinsic_radius + 1);
    for (std::size_t v = 1; v < verts.size(); ++v) {
        const std::size_t p = parent[v];
        for (std::size_t j = 0; j < cols; ++j) S[v * cols + j] = S[p * cols + j] + esc2[p * cols + j];
        auto& w = weights[depth[v]];
        if (w.empty()) w = column_weights(ks, depth[v]);
        double t = 0;
        for (std::size_t j = 0; j < cols; ++j) t += w[j] * S[v * cols + j];
        if (t > out.value) {
            out.value = t;
            out.argmax = verts[v];
        }
    }
    return out;
}

}  // namespace ust4
