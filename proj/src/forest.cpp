#include "ust4/forest.hpp"

#include <algorithm>
#include <ostream>
#include <unordered_map>

namespace ust4 {

namespace {

constexpr std::uint8_t kUnsetCell = 0xFE;

}  // namespace

Region Region::box(std::int64_t radius) {
    if (radius < 0) throw std::invalid_argument("Region::box: negative radius");
    Region r;
    r.is_box_ = true;
    r.radius_ = radius;
    std::int64_t side = 2 * radius + 1;
    r.size_ = static_cast<std::size_t>(side * side * side * side);
    for (int i = 0; i < kDim; ++i) {
        r.lo_[static_cast<std::size_t>(i)] = -radius - 1;
        r.side_[static_cast<std::size_t>(i)] = side + 2;
    }
    std::int64_t s = 1;
    for (int i = 0; i < kDim; ++i) {
        r.stride_[static_cast<std::size_t>(i)] = s;
        s *= r.side_[static_cast<std::size_t>(i)];
    }
    r.cell_count_ = s;
    for (int d = 0; d < kDegree; ++d)
        r.delta_[static_cast<std::size_t>(d)] = (d & 1 ? -1 : 1) * r.stride_[static_cast<std::size_t>(d >> 1)];
    return r;
}

Region Region::patch(const std::vector<Point>& sites) {
    if (sites.empty()) throw std::invalid_argument("Region::patch: empty patch");
    Region r;
    r.is_box_ = false;
    r.patch_sites_ = sites;
    std::sort(r.patch_sites_.begin(), r.patch_sites_.end());
    r.patch_sites_.erase(std::unique(r.patch_sites_.begin(), r.patch_sites_.end()), r.patch_sites_.end());
    r.size_ = r.patch_sites_.size();
    std::int64_t s = 1;
    for (int i = 0; i < kDim; ++i) {
        std::int64_t lo = r.patch_sites_[0][i], hi = lo;
        for (const auto& p : r.patch_sites_) {
            lo = std::min(lo, p[i]);
            hi = std::max(hi, p[i]);
        }
        r.lo_[static_cast<std::size_t>(i)] = lo - 1;
        r.side_[static_cast<std::size_t>(i)] = hi - lo + 3;
        r.stride_[static_cast<std::size_t>(i)] = s;
        s *= hi - lo + 3;
    }
    r.cell_count_ = s;
    for (int d = 0; d < kDegree; ++d)
        r.delta_[static_cast<std::size_t>(d)] = (d & 1 ? -1 : 1) * r.stride_[static_cast<std::size_t>(d >> 1)];
    for (const auto& p : r.patch_sites_) r.radius_ = std::max(r.radius_, norm_inf(p));
    return r;
}

bool Region::contains(const Point& p) const {
    if (is_box_) return norm_inf(p) <= radius_;
    return std::binary_search(patch_sites_.begin(), patch_sites_.end(), p);
}

std::int64_t Region::cell(const Point& p) const {
    std::int64_t c = 0;
    for (int i = 0; i < kDim; ++i) {
        std::int64_t o = p[i] - lo_[static_cast<std::size_t>(i)];
        if (o < 0 || o >= side_[static_cast<std::size_t>(i)]) throw std::out_of_range("Region::cell: outside padding");
        c += o * stride_[static_cast<std::size_t>(i)];
    }
    return c;
}

Point Region::point(std::int64_t cell) const {
    Point p;
    for (int i = 0; i < kDim; ++i) {
        auto ii = static_cast<std::size_t>(i);
        p[i] = cell % side_[ii] + lo_[ii];
        cell /= side_[ii];
    }
    return p;
}

std::vector<Point> Region::sites() const {
    if (!is_box_) return patch_sites_;
    std::vector<Point> out;
    out.reserve(size_);
    for_each_cell([&](std::int64_t c) { out.push_back(point(c)); });
    return out;
}

void Region::for_each_cell(const std::function<void(std::int64_t)>& f) const {
    if (!is_box_) {
        for (const auto& p : patch_sites_) f(cell(p));
        return;
    }
    const std::int64_t R = radius_;
    for (std::int64_t x3 = -R; x3 <= R; ++x3)
        for (std::int64_t x2 = -R; x2 <= R; ++x2)
            for (std::int64_t x1 = -R; x1 <= R; ++x1) {
                std::int64_t c = cell(Point{-R, x1, x2, x3});
                for (std::int64_t x0 = -R; x0 <= R; ++x0) f(c++);
            }
}

void Region::for_each_spiral_cell(const std::function<void(std::int64_t)>& f) const {
    if (!is_box_) {
        std::vector<Point> s = patch_sites_;
        std::stable_sort(s.begin(), s.end(), [](const Point& a, const Point& b) { return norm_inf(a) < norm_inf(b); });
        for (const auto& p : s) f(cell(p));
        return;
    }
    f(cell(kOrigin));
    for (std::int64_t r = 1; r <= radius_; ++r)
        for (std::int64_t x0 = -r; x0 <= r; ++x0)
            for (std::int64_t x1 = -r; x1 <= r; ++x1)
                for (std::int64_t x2 = -r; x2 <= r; ++x2) {
                    bool on_shell = std::max({std::abs(x0), std::abs(x1), std::abs(x2)}) == r;
                    if (on_shell) {
                        for (std::int64_t x3 = -r; x3 <= r; ++x3) f(cell(Point{x0, x1, x2, x3}));
                    } else {
                        f(cell(Point{x0, x1, x2, -r}));
                        f(cell(Point{x0, x1, x2, r}));
                    }
                }
}

OrientedForest::OrientedForest(Region region) : region_(std::move(region)) {
    dir_.assign(static_cast<std::size_t>(region_.cell_count()), kOutsideCell);
    region_.for_each_cell([&](std::int64_t c) { dir_[static_cast<std::size_t>(c)] = kUnsetCell; });
}

int OrientedForest::parent_dir(const Point& x) const {
    if (!region_.contains(x)) throw std::out_of_range("OrientedForest: site outside region");
    return dir_[static_cast<std::size_t>(region_.cell(x))];
}

std::optional<Point> OrientedForest::parent(const Point& x) const {
    int d = parent_dir(x);
    if (d == kRootDir) return std::nullopt;
    Point y = step(x, d);
    if (!region_.contains(y)) return std::nullopt;
    return y;
}

bool OrientedForest::to_sink(const Point& x) const {
    int d = parent_dir(x);
    return d != kRootDir && !region_.contains(step(x, d));
}

LatticePath OrientedForest::future(const Point& x) const {
    std::vector<Point> s{x};
    Point p = x;
    while (true) {
        int d = parent_dir(p);
        if (d == kRootDir) break;
        if (d >= kDegree) throw ForestError("future: unset parent");
        p = step(p, d);
        s.push_back(p);
        if (!region_.contains(p)) break;
        if (s.size() > region_.size() + 1) throw ForestError("future: cycle");
    }
    return LatticePath(std::move(s));
}

std::optional<LatticePath> OrientedForest::tree_path(const Point& x, const Point& y) const {
    auto fx = future(x).sites, fy = future(y).sites;
    std::unordered_map<Point, std::size_t, PointHash> pos;
    for (std::size_t i = 0; i < fx.size(); ++i)
        if (region_.contains(fx[i])) pos.emplace(fx[i], i);
    for (std::size_t j = 0; j < fy.size(); ++j) {
        auto it = pos.find(fy[j]);
        if (it == pos.end()) continue;
        std::vector<Point> out(fx.begin(), fx.begin() + static_cast<std::ptrdiff_t>(it->second) + 1);
        for (std::size_t k = j; k-- > 0;) out.push_back(fy[k]);
        return LatticePath(std::move(out));
    }
    return std::nullopt;
}

std::vector<Point> OrientedForest::children(const Point& x) const {
    std::vector<Point> out;
    for (int d = 0; d < kDegree; ++d) {
        Point y = step(x, d);
        if (region_.contains(y) && parent_dir(y) == opposite(d)) out.push_back(y);
    }
    return out;
}

PastSummary OrientedForest::past_summary(const Point& x) const {
    if (!region_.contains(x)) throw std::out_of_range("past_summary: site outside region");
    PastSummary s;
    s.origin = x;
    std::vector<Point> level{x}, next;
    while (!level.empty()) {
        s.shell_sizes.push_back(level.size());
        s.volume += level.size();
        next.clear();
        for (const auto& p : level) {
            s.extrinsic_radius = std::max(s.extrinsic_radius, norm_inf(p - x));
            for (const auto& c : children(p)) next.push_back(c);
        }
        std::swap(level, next);
    }
    s.intrinsic_radius = s.shell_sizes.size() - 1;
    return s;
}

void OrientedForest::validate() const {
    // 0 = unvisited, 1 = on the current chain, 2 = known to reach a root or the sink.
    std::vector<std::uint8_t> state(dir_.size(), 0);
    std::vector<std::int64_t> chain;
    region_.for_each_cell([&](std::int64_t start) {
        chain.clear();
        std::int64_t c = start;
        while (true) {
            auto cc = static_cast<std::size_t>(c);
            if (dir_[cc] == kOutsideCell || state[cc] == 2) break;
            if (state[cc] == 1) throw ForestError("validate: cycle through " + to_string(region_.point(c)));
            std::uint8_t d = dir_[cc];
            if (d == kRootDir) {
                if (!wired_ || region_.cell(*wired_) != c) throw ForestError("validate: stray root");
                break;
            }
            if (d >= kDegree) throw ForestError("validate: unset site " + to_string(region_.point(c)));
            state[cc] = 1;
            chain.push_back(c);
            c += region_.delta(d);
        }
        for (auto k : chain) state[static_cast<std::size_t>(k)] = 2;
    });
    if (wired_ && dir_[static_cast<std::size_t>(region_.cell(*wired_))] != kRootDir)
        throw ForestError("validate: wired vertex is not a root");
}

void OrientedForest::dump(std::ostream& os) const {
    region_.for_each_cell([&](std::int64_t c) {
        Point x = region_.point(c);
        os << x[0] << ' ' << x[1] << ' ' << x[2] << ' ' << x[3] << " -> ";
        int d = dir_[static_cast<std::size_t>(c)];
        if (d == kRootDir) {
            os << "ROOT\n";
            return;
        }
        Point y = step(x, d);
        if (!region_.contains(y))
            os << "SINK\n";
        else
            os << y[0] << ' ' << y[1] << ' ' << y[2] << ' ' << y[3] << '\n';
    });
}

namespace {

OrientedForest wilson(const Region& region, const std::optional<Point>& v, RngStream& rng,
                      const std::vector<Point>* order) {
    OrientedForest f(region);
    auto& dir = f.cells();
    std::vector<std::uint8_t> in_tree(dir.size(), 0);
    std::array<std::int64_t, kDegree> delta{};
    for (int d = 0; d < kDegree; ++d) delta[static_cast<std::size_t>(d)] = region.delta(d);
    if (v) {
        if (!region.contains(*v)) throw std::invalid_argument("wilson_vwired: v outside region");
        auto c = static_cast<std::size_t>(region.cell(*v));
        dir[c] = kRootDir;
        in_tree[c] = 1;
        f.set_wired_vertex(*v);
    }
    auto branch = [&](std::int64_t u) {
        std::int64_t c = u;
        std::uint64_t steps = 0;
        while (dir[static_cast<std::size_t>(c)] != kOutsideCell && !in_tree[static_cast<std::size_t>(c)]) {
            int d = rng.direction();
            dir[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(d);
            c += delta[static_cast<std::size_t>(d)];
            if (++steps > kWilsonHorizon)
                throw ForestError("wilson: branch from " + to_string(region.point(u)) + " exceeded the safety horizon");
        }
        c = u;
        while (dir[static_cast<std::size_t>(c)] != kOutsideCell && !in_tree[static_cast<std::size_t>(c)]) {
            in_tree[static_cast<std::size_t>(c)] = 1;
            c += delta[dir[static_cast<std::size_t>(c)]];
        }
    };
    if (order)
        for (const auto& p : *order) {
            if (!region.contains(p)) throw std::invalid_argument("wilson: order lists a site outside the region");
            branch(region.cell(p));
        }
    region.for_each_spiral_cell(branch);
    return f;
}

}  // namespace

OrientedForest wilson_wired(const Region& region, RngStream& rng, const std::vector<Point>* order) {
    return wilson(region, std::nullopt, rng, order);
}

OrientedForest wilson_vwired(const Region& region, const Point& v, RngStream& rng) {
    return wilson(region, v, rng, nullptr);
}

BigInt spanning_tree_count(const std::vector<std::vector<int>>& m, std::size_t max_vertices) {
    const std::size_t n = m.size();
    if (n > max_vertices) throw std::invalid_argument("spanning_tree_count: vertex cap exceeded");
    if (n <= 1) return 1;
    // Reduced Laplacian: drop the last vertex.
    const std::size_t k = n - 1;
    std::vector<std::vector<BigInt>> a(k, std::vector<BigInt>(k));
    for (std::size_t i = 0; i < k; ++i) {
        if (m[i].size() != n) throw std::invalid_argument("spanning_tree_count: matrix not square");
        long deg = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) deg += m[i][j];
        for (std::size_t j = 0; j < k; ++j) a[i][j] = (i == j) ? BigInt(deg) : BigInt(-m[i][j]);
    }
    // Bareiss fraction-free elimination.
    BigInt prev = 1;
    int sign = 1;
    for (std::size_t p = 0; p < k; ++p) {
        if (a[p][p] == 0) {
            std::size_t r = p + 1;
            while (r < k && a[r][p] == 0) ++r;
            if (r == k) return 0;
            std::swap(a[p], a[r]);
            sign = -sign;
        }
        for (std::size_t i = p + 1; i < k; ++i) {
            for (std::size_t j = p + 1; j < k; ++j) a[i][j] = (a[i][j] * a[p][p] - a[i][p] * a[p][j]) / prev;
            a[i][p] = 0;
        }
        prev = a[p][p];
    }
    return sign * a[k - 1][k - 1];
}

BigInt spanning_tree_count(const Region& region, const std::optional<Point>& v, std::size_t max_vertices) {
    std::vector<Point> sites = region.sites();
    if (v) {
        if (!region.contains(*v)) throw std::invalid_argument("spanning_tree_count: v outside region");
        sites.erase(std::find(sites.begin(), sites.end(), *v));
    }
    const std::size_t n = sites.size() + 1;
    if (n > max_vertices) throw std::invalid_argument("spanning_tree_count: vertex cap exceeded");
    std::unordered_map<Point, std::size_t, PointHash> idx;
    for (std::size_t i = 0; i < sites.size(); ++i) idx[sites[i]] = i;
    const std::size_t sink = n - 1;
    std::vector<std::vector<int>> m(n, std::vector<int>(n, 0));
    for (std::size_t i = 0; i < sites.size(); ++i)
        for (const auto& y : neighbors(sites[i])) {
            auto it = idx.find(y);
            if (it != idx.end()) {
                ++m[i][it->second];
            } else {
                ++m[i][sink];
                ++m[sink][i];
            }
        }
    return spanning_tree_count(m, max_vertices);
}

PastSummary lazy_past(const Point& origin, bool origin_wired, RngStream& rng, const LazyPastOptions& opt) {
    const std::int64_t R = opt.box_radius;
    if (R < 0 || R > 8192) throw std::invalid_argument("lazy_past: box radius out of range");
    if (norm_inf(origin) > R) throw std::invalid_argument("lazy_past: origin outside box");

    // Tree entries: depth + 1 for past vertices, 0 otherwise.
    FlatMap<std::uint32_t> tree(1 << 12);
    // Wilson next-pointers of the current branch, stamped with the branch number.
    FlatMap<std::uint64_t> next(1 << 12);
    std::uint64_t generation = 0;

    PastSummary s;
    s.origin = origin;
    std::vector<std::uint64_t> to_expand;
    std::vector<std::uint64_t> branch;

    auto record = [&](std::uint64_t key, std::uint64_t depth) {
        if (depth > opt.max_depth) {
            s.truncated = true;
            return;
        }
        if (s.shell_sizes.size() <= depth) s.shell_sizes.resize(depth + 1, 0);
        ++s.shell_sizes[depth];
        ++s.volume;
        s.intrinsic_radius = std::max(s.intrinsic_radius, depth);
        s.extrinsic_radius = std::max(s.extrinsic_radius, norm_inf(unpack(key) - origin));
        if (depth < opt.max_depth)
            to_expand.push_back(key);
        else
            s.truncated = true;
    };

    auto run_branch = [&](const Point& start) {
        ++generation;
        if (next.size() > (1u << 22)) next.clear();
        std::array<std::int64_t, kDim> c{start[0], start[1], start[2], start[3]};
        std::uint64_t key = pack(start);
        std::uint64_t steps = 0;
        std::uint32_t join = 0;  // tree value at the join point; 0 for the sink
        while (true) {
            if (const auto* t = tree.find(key)) {
                join = *t;
                break;
            }
            int d = rng.direction();
            next[key] = (generation << 4) | static_cast<std::uint64_t>(d);
            key = pack_step(key, d);
            std::int64_t& cc = c[static_cast<std::size_t>(d >> 1)];
            cc += (d & 1) ? -1 : 1;
            if (std::abs(cc) > R) break;
            if (++steps > kWilsonHorizon) throw ForestError("lazy_past: branch exceeded the safety horizon");
        }
        branch.clear();
        std::uint64_t k = pack(start);
        while (!tree.contains(k) && k != key) {
            branch.push_back(k);
            k = pack_step(k, static_cast<int>(*next.find(k) & 0xF));
        }
        const std::size_t L = branch.size();
        for (std::size_t i = 0; i < L; ++i) {
            std::uint32_t v = 0;
            if (join != 0) {
                std::uint64_t depth = (join - 1) + (L - i);
                v = static_cast<std::uint32_t>(std::min<std::uint64_t>(depth + 1, UINT32_MAX));
            }
            tree[branch[i]] = v;
        }
        if (join != 0)
            for (std::size_t i = 0; i < L; ++i) record(branch[i], (join - 1) + (L - i));
    };

    const std::uint64_t okey = pack(origin);
    if (origin_wired) {
        tree[okey] = 1;
    } else {
        run_branch(origin);
        tree[okey] = 1;
    }
    record(okey, 0);

    while (!to_expand.empty()) {
        if (s.volume >= opt.max_volume || s.extrinsic_radius >= opt.max_extrinsic) {
            s.truncated = true;
            break;
        }
        std::uint64_t x = to_expand.back();
        to_expand.pop_back();
        Point p = unpack(x);
        for (int d = 0; d < kDegree; ++d) {
            Point y = step(p, d);
            if (norm_inf(y) > R) continue;
            if (!tree.contains(pack(y))) run_branch(y);
        }
    }
    return s;
}

std::vector<std::uint8_t> wilson_partial(const std::vector<Point>& sites, std::int64_t radius, RngStream& rng) {
    if (radius < 0 || radius > 8192) throw std::invalid_argument("wilson_partial: radius out of range");
    // Tree membership and Wilson next-pointers, stamped with the branch number.
    FlatMap<std::uint8_t> tree(4 * sites.size() + 16);
    FlatMap<std::uint64_t> next(1 << 12);
    std::uint64_t generation = 0;
    for (const auto& u : sites) {
        if (norm_inf(u) > radius) throw std::invalid_argument("wilson_partial: site outside box");
        std::uint64_t key = pack(u);
        if (tree.contains(key)) continue;
        ++generation;
        std::array<std::int64_t, kDim> c{u[0], u[1], u[2], u[3]};
        std::uint64_t steps = 0;
        while (!tree.contains(key)) {
            int d = rng.direction();
            next[key] = (generation << 4) | static_cast<std::uint64_t>(d);
            key = pack_step(key, d);
            std::int64_t& cc = c[static_cast<std::size_t>(d >> 1)];
            cc += (d & 1) ? -1 : 1;
            if (std::abs(cc) > radius) break;
            if (++steps > kWilsonHorizon) throw ForestError("wilson_partial: branch exceeded the safety horizon");
        }
        std::uint64_t k = pack(u);
        while (!tree.contains(k) && k != key) {
            auto d = static_cast<std::uint8_t>(*next.find(k) & 0xF);
            tree[k] = d;
            k = pack_step(k, d);
        }
    }
    std::vector<std::uint8_t> out;
    out.reserve(sites.size());
    for (const auto& u : sites) out.push_back(*tree.find(pack(u)));
    return out;
}

}  // namespace ust4
