#include "ust4/sandpile.hpp"

#include <algorithm>
#include <deque>
#include <istream>
#include <ostream>
#include <string>

namespace ust4 {

SandpileConfig::SandpileConfig(Region region, std::int32_t fill) : region_(std::move(region)) {
    if (fill < 0) throw std::invalid_argument("SandpileConfig: negative height");
    h_.assign(static_cast<std::size_t>(region_.cell_count()), -1);
    region_.for_each_cell([&](std::int64_t c) { h_[static_cast<std::size_t>(c)] = fill; });
}

std::size_t SandpileConfig::idx(const Point& x) const {
    if (!region_.contains(x)) throw std::out_of_range("SandpileConfig: site outside region");
    return static_cast<std::size_t>(region_.cell(x));
}

bool SandpileConfig::is_stable() const {
    for (auto v : h_)
        if (v >= kTopplingThreshold) return false;
    return true;
}

std::int64_t SandpileConfig::mass() const {
    std::int64_t m = 0;
    for (auto v : h_)
        if (v > 0) m += v;
    return m;
}

std::vector<std::int32_t> SandpileConfig::heights() const {
    std::vector<std::int32_t> out;
    out.reserve(region_.size());
    region_.for_each_cell([&](std::int64_t c) { out.push_back(h_[static_cast<std::size_t>(c)]); });
    return out;
}

void SandpileConfig::set_heights(const std::vector<std::int32_t>& h) {
    if (h.size() != region_.size()) throw std::invalid_argument("SandpileConfig::set_heights: size mismatch");
    std::size_t i = 0;
    region_.for_each_cell([&](std::int64_t c) {
        if (h[i] < 0) throw std::invalid_argument("SandpileConfig::set_heights: negative height");
        h_[static_cast<std::size_t>(c)] = h[i++];
    });
}

void SandpileConfig::dump(std::ostream& os) const {
    if (!region_.is_box()) throw std::invalid_argument("SandpileConfig::dump: boxes only");
    const std::int64_t side = 2 * region_.radius() + 1;
    os << "sandpile radius " << region_.radius() << " sites " << region_.size() << '\n';
    std::int64_t col = 0;
    region_.for_each_cell([&](std::int64_t c) {
        os << h_[static_cast<std::size_t>(c)] << (++col % side == 0 ? '\n' : ' ');
    });
}

SandpileConfig SandpileConfig::read(std::istream& is) {
    std::string w1, w2, w3;
    std::int64_t radius = 0;
    std::size_t sites = 0;
    if (!(is >> w1 >> w2 >> radius >> w3 >> sites) || w1 != "sandpile" || w2 != "radius" || w3 != "sites")
        throw std::invalid_argument("SandpileConfig::read: bad header");
    SandpileConfig c(Region::box(radius));
    if (sites != c.region().size()) throw std::invalid_argument("SandpileConfig::read: site count mismatch");
    std::vector<std::int32_t> h(sites);
    for (auto& v : h)
        if (!(is >> v)) throw std::invalid_argument("SandpileConfig::read: truncated heights");
    c.set_heights(h);
    return c;
}

Stabilization stabilize(SandpileConfig config, Schedule schedule, RngStream* rng) {
    if (schedule == Schedule::Random && !rng) throw std::invalid_argument("stabilize: random schedule needs an rng");
    const Region& region = config.region();
    auto& h = config.cells();
    Stabilization out;
    out.odometer.assign(h.size(), 0);
    std::array<std::int64_t, kDegree> delta{};
    for (int d = 0; d < kDegree; ++d) delta[static_cast<std::size_t>(d)] = region.delta(d);

    auto topple = [&](std::int64_t c, std::int32_t k, auto&& on_unstable) {
        auto cc = static_cast<std::size_t>(c);
        h[cc] -= kTopplingThreshold * k;
        if (out.odometer[cc] == 0) out.toppled.push_back(c);
        out.odometer[cc] += static_cast<std::uint64_t>(k);
        out.total_topplings += static_cast<std::uint64_t>(k);
        for (auto dl : delta) {
            auto n = static_cast<std::size_t>(c + dl);
            if (h[n] < 0) continue;  // sink
            h[n] += k;
            if (h[n] >= kTopplingThreshold) on_unstable(static_cast<std::int64_t>(n));
        }
    };

    if (schedule == Schedule::Fifo) {
        std::vector<std::uint8_t> queued(h.size(), 0);
        std::deque<std::int64_t> q;
        auto push = [&](std::int64_t c) {
            if (!queued[static_cast<std::size_t>(c)]) {
                queued[static_cast<std::size_t>(c)] = 1;
                q.push_back(c);
            }
        };
        region.for_each_cell([&](std::int64_t c) {
            if (h[static_cast<std::size_t>(c)] >= kTopplingThreshold) push(c);
        });
        while (!q.empty()) {
            std::int64_t c = q.front();
            q.pop_front();
            queued[static_cast<std::size_t>(c)] = 0;
            std::int32_t k = h[static_cast<std::size_t>(c)] / kTopplingThreshold;
            if (k > 0) topple(c, k, push);
        }
    } else {
        std::vector<std::int64_t> unstable;
        std::vector<std::int64_t> pos(h.size(), -1);
        auto add = [&](std::int64_t c) {
            if (pos[static_cast<std::size_t>(c)] < 0) {
                pos[static_cast<std::size_t>(c)] = static_cast<std::int64_t>(unstable.size());
                unstable.push_back(c);
            }
        };
        region.for_each_cell([&](std::int64_t c) {
            if (h[static_cast<std::size_t>(c)] >= kTopplingThreshold) add(c);
        });
        while (!unstable.empty()) {
            auto i = static_cast<std::size_t>(rng->below(unstable.size()));
            std::int64_t c = unstable[i];
            topple(c, 1, add);
            if (h[static_cast<std::size_t>(c)] < kTopplingThreshold) {
                std::int64_t last = unstable.back();
                unstable[i] = last;
                pos[static_cast<std::size_t>(last)] = static_cast<std::int64_t>(i);
                unstable.pop_back();
                pos[static_cast<std::size_t>(c)] = -1;
            }
        }
    }
    out.config = std::move(config);
    return out;
}

namespace {

/// Generation of every cell under synchronous burning; 0 for non-sites, -1 if unburnt.
std::vector<std::int32_t> burn_generations(const SandpileConfig& config) {
    const Region& region = config.region();
    const auto& h = config.cells();
    std::vector<std::int32_t> gen(h.size(), 0), unburnt(h.size(), 0);
    std::vector<std::int64_t> frontier, next;
    std::vector<std::uint8_t> flagged(h.size(), 0);
    region.for_each_cell([&](std::int64_t c) {
        auto cc = static_cast<std::size_t>(c);
        if (h[cc] >= kTopplingThreshold) throw std::invalid_argument("burning: config is not stable");
        gen[cc] = -1;
        for (int d = 0; d < kDegree; ++d) unburnt[cc] += h[static_cast<std::size_t>(c + region.delta(d))] >= 0;
    });
    region.for_each_cell([&](std::int64_t c) {
        auto cc = static_cast<std::size_t>(c);
        if (h[cc] >= unburnt[cc]) {
            frontier.push_back(c);
            flagged[cc] = 1;
        }
    });
    for (std::int32_t g = 1; !frontier.empty(); ++g) {
        for (auto c : frontier) gen[static_cast<std::size_t>(c)] = g;
        next.clear();
        for (auto c : frontier)
            for (int d = 0; d < kDegree; ++d) {
                auto n = static_cast<std::size_t>(c + region.delta(d));
                if (h[n] < 0 || gen[n] != -1) continue;
                --unburnt[n];
                if (!flagged[n] && h[n] >= unburnt[n]) {
                    flagged[n] = 1;
                    next.push_back(static_cast<std::int64_t>(n));
                }
            }
        std::swap(frontier, next);
    }
    return gen;
}

}  // namespace

bool is_recurrent(const SandpileConfig& config) {
    auto gen = burn_generations(config);
    for (auto g : gen)
        if (g < 0) return false;
    return true;
}

SandpileConfig tree_to_recurrent(const OrientedForest& forest) {
    const Region& region = forest.region();
    if (forest.wired_vertex()) throw std::invalid_argument("tree_to_recurrent: forest must be wired at the sink only");
    const auto& dir = forest.cells();
    // Depth from the sink; 0 marks non-sites.
    std::vector<std::int32_t> depth(dir.size(), -1);
    for (std::size_t c = 0; c < dir.size(); ++c)
        if (dir[c] == kOutsideCell) depth[c] = 0;
    std::vector<std::int64_t> chain;
    region.for_each_cell([&](std::int64_t start) {
        chain.clear();
        std::int64_t c = start;
        while (depth[static_cast<std::size_t>(c)] < 0) {
            std::uint8_t d = dir[static_cast<std::size_t>(c)];
            if (d >= kDegree) throw ForestError("tree_to_recurrent: incomplete forest");
            chain.push_back(c);
            if (chain.size() > region.size()) throw ForestError("tree_to_recurrent: cycle");
            c += region.delta(d);
        }
        std::int32_t base = depth[static_cast<std::size_t>(c)];
        for (std::size_t i = chain.size(); i-- > 0;) depth[static_cast<std::size_t>(chain[i])] = ++base;
    });
    SandpileConfig config(region);
    auto& h = config.cells();
    region.for_each_cell([&](std::int64_t c) {
        auto cc = static_cast<std::size_t>(c);
        const std::int32_t g = depth[cc];
        std::int32_t k = 0, b = 0, j = -1;
        for (int d = 0; d < kDegree; ++d) {
            std::int32_t gy = depth[static_cast<std::size_t>(c + region.delta(d))];
            if (gy == g - 1) {
                if (d == dir[cc]) j = k;
                ++k;
            } else if (gy <= g - 2) {
                ++b;
            }
        }
        if (j < 0) throw ForestError("tree_to_recurrent: parent not one generation up");
        h[cc] = kTopplingThreshold - b - k + j;
    });
    return config;
}

OrientedForest recurrent_to_tree(const SandpileConfig& config) {
    const Region& region = config.region();
    auto gen = burn_generations(config);
    OrientedForest f(region);
    auto& dir = f.cells();
    const auto& h = config.cells();
    region.for_each_cell([&](std::int64_t c) {
        auto cc = static_cast<std::size_t>(c);
        const std::int32_t g = gen[cc];
        if (g < 0) throw NotRecurrent("recurrent_to_tree: config is not recurrent");
        std::int32_t k = 0, b = 0;
        std::array<int, kDegree> up{};
        for (int d = 0; d < kDegree; ++d) {
            std::int32_t gy = gen[static_cast<std::size_t>(c + region.delta(d))];
            if (gy == g - 1)
                up[static_cast<std::size_t>(k++)] = d;
            else if (gy <= g - 2 && gy >= 0)
                ++b;
        }
        std::int32_t j = h[cc] - (kTopplingThreshold - b - k);
        if (j < 0 || j >= k) throw NotRecurrent("recurrent_to_tree: inconsistent burning");
        dir[cc] = static_cast<std::uint8_t>(up[static_cast<std::size_t>(j)]);
    });
    return f;
}

std::uint64_t add_grain(SandpileConfig& config, const Point& x, FlatMap<std::uint64_t>* odometer) {
    const Region& region = config.region();
    auto& h = config.cells();
    std::array<std::int64_t, kDegree> delta{};
    for (int d = 0; d < kDegree; ++d) delta[static_cast<std::size_t>(d)] = region.delta(d);
    if (!region.contains(x)) throw std::out_of_range("add_grain: site outside region");
    const std::int64_t start = region.cell(x);
    if (h[static_cast<std::size_t>(start)] >= kTopplingThreshold) throw std::invalid_argument("add_grain: unstable config");
    // Every unstable cell sits in the queue exactly once: it is pushed when it crosses the threshold.
    std::deque<std::int64_t> q;
    if (++h[static_cast<std::size_t>(start)] >= kTopplingThreshold) q.push_back(start);
    std::uint64_t total = 0;
    while (!q.empty()) {
        std::int64_t c = q.front();
        q.pop_front();
        auto cc = static_cast<std::size_t>(c);
        std::int32_t k = h[cc] / kTopplingThreshold;
        h[cc] -= kTopplingThreshold * k;
        total += static_cast<std::uint64_t>(k);
        if (odometer) (*odometer)[static_cast<std::uint64_t>(c) + 1] += static_cast<std::uint64_t>(k);
        for (auto dl : delta) {
            auto n = static_cast<std::size_t>(c + dl);
            if (h[n] < 0) continue;
            std::int32_t before = h[n];
            h[n] += k;
            if (before < kTopplingThreshold && h[n] >= kTopplingThreshold) q.push_back(static_cast<std::int64_t>(n));
        }
    }
    return total;
}

AvalancheRecord avalanche_from(SandpileConfig config, const Point& site) {
    AvalancheRecord rec;
    rec.origin_height = config.at(site);
    FlatMap<std::uint64_t> odo(64);
    rec.total_topplings = add_grain(config, site, &odo);
    const Region& region = config.region();
    odo.for_each([&](std::uint64_t key, std::uint64_t count) {
        Point p = region.point(static_cast<std::int64_t>(key - 1));
        rec.odometer.emplace_back(p, count);
        rec.ext_radius = std::max(rec.ext_radius, norm_inf(p - site));
    });
    std::sort(rec.odometer.begin(), rec.odometer.end());
    rec.cluster_size = rec.odometer.size();
    return rec;
}

AvalancheRecord sample_avalanche(const Region& region, RngStream& rng) {
    if (!region.contains(kOrigin)) throw std::invalid_argument("sample_avalanche: region must contain the origin");
    return avalanche_from(tree_to_recurrent(wilson_wired(region, rng)), kOrigin);
}

}  // namespace ust4
