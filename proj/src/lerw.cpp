#include "ust4/lerw.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace ust4 {

LoopErasure loop_erase(const LatticePath& path) {
    LoopErasure out;
    if (path.sites.empty()) return out;
    std::vector<Point> stack;
    std::vector<std::size_t> times;
    std::unordered_map<Point, std::size_t, PointHash> pos;
    pos.reserve(path.sites.size());
    for (std::size_t t = 0; t < path.sites.size(); ++t) {
        const Point& p = path.sites[t];
        auto it = pos.find(p);
        if (it != pos.end()) {
            std::size_t keep = it->second + 1;
            for (std::size_t j = keep; j < stack.size(); ++j) pos.erase(stack[j]);
            stack.resize(keep);
            times.resize(keep);
        } else {
            pos.emplace(p, stack.size());
            stack.push_back(p);
            times.push_back(t);
        }
    }
    const std::size_t len = path.length();
    out.rho.assign(len + 1, 0);
    std::size_t m = 0;
    for (std::size_t n = 0; n <= len; ++n) {
        while (m + 1 < times.size() && times[m + 1] <= n) ++m;
        out.rho[n] = m;
    }
    out.le_path = LatticePath(std::move(stack));
    out.ell = std::move(times);
    return out;
}

LatticePath reverse_loop_erase(const LatticePath& path) { return loop_erase(path.reversed()).le_path.reversed(); }

StreamingErasure::StreamingErasure(const Point& start, std::size_t expected_length) : pos_(expected_length) {
    if (!packable(start)) throw std::out_of_range("StreamingErasure: start outside packed range");
    keys_.reserve(expected_length);
    times_.reserve(expected_length);
    current_ = pack(start);
    push_key(current_);
}

void StreamingErasure::push_key(std::uint64_t k) {
    std::uint32_t* p = pos_.find(k);
    if (p != nullptr) {
        std::size_t keep = *p + 1;
        for (std::size_t j = keep; j < keys_.size(); ++j) pos_.erase(keys_[j]);
        keys_.resize(keep);
        times_.resize(keep);
    } else {
        pos_[k] = static_cast<std::uint32_t>(keys_.size());
        keys_.push_back(k);
        times_.push_back(time_);
    }
}

void StreamingErasure::feed(const Point& next) {
    int d = direction_between(unpack(current_), next);
    if (d < 0) throw std::invalid_argument("StreamingErasure::feed: step is not to a neighbour");
    feed_direction(d);
}

void StreamingErasure::feed_direction(int d) {
    if ((time_ & (kPackMargin - 1)) == 0 && !packed_has_margin(current_))
        throw std::out_of_range("StreamingErasure: walk left packed range");
    current_ = pack_step(current_, d);
    ++time_;
    push_key(current_);
}

LatticePath StreamingErasure::path() const {
    std::vector<Point> s;
    s.reserve(keys_.size());
    for (auto k : keys_) s.push_back(unpack(k));
    return LatticePath(std::move(s));
}

std::size_t StreamingErasure::rho(std::size_t n) const {
    auto it = std::upper_bound(times_.begin(), times_.end(), n);
    return static_cast<std::size_t>(it - times_.begin()) - 1;
}

std::size_t StreamingErasure::eta(std::size_t n) const { return times_[rho(n)]; }

LatticePath StreamingErasure::infinite_prefix(std::size_t n) const {
    std::size_t r = rho(n);
    std::vector<Point> s;
    for (std::size_t i = 0; i <= r; ++i) s.push_back(unpack(keys_[i]));
    return LatticePath(std::move(s));
}

std::pair<LoopErasure, StopOutcome> lerw_to_target(const Point& start, const PointSet& target,
                                                   std::int64_t escape_radius, RngStream& rng,
                                                   std::uint64_t horizon) {
    auto [path, out] = srw_until(start, target, escape_radius, horizon, rng);
    return {loop_erase(path), out};
}

namespace {

/// Loop-erasure of a walk of at most 16 steps, maintained incrementally along a DFS.
struct SmallErasure {
    std::array<Point, 17> pts;
    int size = 0;

    void push(const Point& p) {
        for (int i = 0; i < size; ++i)
            if (pts[static_cast<std::size_t>(i)] == p) {
                size = i + 1;
                return;
            }
        pts[static_cast<std::size_t>(size++)] = p;
    }
    bool has_prefix(const std::vector<Point>& g) const {
        if (static_cast<int>(g.size()) > size) return false;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (pts[i] != g[i]) return false;
        return true;
    }
    bool equals(const std::vector<Point>& g) const {
        return static_cast<int>(g.size()) == size && has_prefix(g);
    }
};

bool in_set(const std::vector<Point>& s, const Point& p) { return std::find(s.begin(), s.end(), p) != s.end(); }

/// DFS over all walks of length <= max_len from start. visit(depth, walk_site,
/// erasure) returns false to prune the subtree below the current node.
template <class Visit>
void enumerate_walks(const Point& start, int max_len, Visit&& visit) {
    std::array<SmallErasure, 17> le;
    std::array<Point, 17> site;
    std::array<int, 17> dir{};
    le[0].push(start);
    site[0] = start;
    if (!visit(0, site[0], le[0]) || max_len == 0) return;
    int depth = 1;
    dir[1] = -1;
    while (depth > 0) {
        auto di = static_cast<std::size_t>(depth);
        if (++dir[di] == kDegree) {
            --depth;
            continue;
        }
        site[di] = step(site[di - 1], dir[di]);
        le[di] = le[di - 1];
        le[di].push(site[di]);
        if (visit(depth, site[di], le[di]) && depth < max_len) {
            ++depth;
            dir[static_cast<std::size_t>(depth)] = -1;
        }
    }
}

}  // namespace

ReversibilityResult check_reversibility(int max_len, const LatticePath& eta, const std::vector<Point>& A) {
    if (max_len < 0 || max_len > 10) throw std::invalid_argument("check_reversibility: max_len must be in [0, 10]");
    if (eta.sites.empty() || !eta.is_self_avoiding() || !eta.is_nearest_neighbor())
        throw std::invalid_argument("check_reversibility: eta must be a nonempty self-avoiding path");
    ReversibilityResult r;
    r.lhs_counts.assign(static_cast<std::size_t>(max_len) + 1, 0);
    r.rhs_counts.assign(static_cast<std::size_t>(max_len) + 1, 0);
    const std::vector<Point>& fwd = eta.sites;
    const std::vector<Point> bwd = eta.reversed().sites;

    // Forward: X_1..X_n avoid A.
    enumerate_walks(fwd.front(), max_len, [&](int n, const Point& x, const SmallErasure& le) {
        if (n > 0 && in_set(A, x)) return false;
        if (le.equals(fwd)) ++r.lhs_counts[static_cast<std::size_t>(n)];
        return true;
    });
    // Reverse: X_0..X_{n-1} avoid A, so X_n may lie in A but nothing beyond it may continue.
    enumerate_walks(bwd.front(), max_len, [&](int n, const Point& x, const SmallErasure& le) {
        if (le.equals(bwd)) ++r.rhs_counts[static_cast<std::size_t>(n)];
        return !in_set(A, x);
    });
    double scale = 1.0;
    for (int n = 0; n <= max_len; ++n) {
        auto i = static_cast<std::size_t>(n);
        double diff = std::abs(static_cast<double>(r.lhs_counts[i]) - static_cast<double>(r.rhs_counts[i])) / scale;
        r.max_deviation = std::max(r.max_deviation, diff);
        if (r.lhs_counts[i] > 0 && r.rhs_counts[i] > 0) ++r.nonzero_terms;
        scale *= kDegree;
    }
    return r;
}

DomainMarkovResult check_domain_markov(double mean_t, const LatticePath& omega, const LatticePath& eta, int max_len) {
    if (!(mean_t > 0.0)) throw std::invalid_argument("check_domain_markov: mean_t must be positive");
    if (max_len < 0 || max_len > 10) throw std::invalid_argument("check_domain_markov: max_len must be in [0, 10]");
    if (omega.sites.empty() || eta.sites.empty() || omega.back() != eta.front())
        throw std::invalid_argument("check_domain_markov: omega must end where eta starts");
    std::vector<Point> joined = omega.sites;
    joined.insert(joined.end(), eta.sites.begin() + 1, eta.sites.end());
    if (!LatticePath(joined).is_self_avoiding() || !LatticePath(joined).is_nearest_neighbor())
        throw std::invalid_argument("check_domain_markov: omega and eta must form a self-avoiding path");

    const double p = 1.0 / (mean_t + 1.0), q = mean_t / (mean_t + 1.0);
    std::vector<double> w(static_cast<std::size_t>(max_len) + 1);
    for (int j = 0; j <= max_len; ++j)
        w[static_cast<std::size_t>(j)] = p * std::pow(q, j) * std::pow(1.0 / kDegree, j);

    // Prefix events for the walk from omega_0.
    std::vector<std::uint64_t> cnt_joined(w.size(), 0), cnt_omega(w.size(), 0);
    enumerate_walks(omega.front(), max_len, [&](int n, const Point&, const SmallErasure& le) {
        auto i = static_cast<std::size_t>(n);
        if (le.has_prefix(omega.sites)) ++cnt_omega[i];
        if (le.has_prefix(joined)) ++cnt_joined[i];
        return true;
    });
    // Walk from omega_k avoiding omega after time 0.
    std::vector<std::uint64_t> cnt_eta(w.size(), 0), cnt_avoid(w.size(), 0);
    enumerate_walks(eta.front(), max_len, [&](int n, const Point& x, const SmallErasure& le) {
        if (n > 0 && in_set(omega.sites, x)) return false;
        auto i = static_cast<std::size_t>(n);
        ++cnt_avoid[i];
        if (le.has_prefix(eta.sites)) ++cnt_eta[i];
        return true;
    });

    double a = 0, b = 0, c = 0, d = 0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        a += w[j] * static_cast<double>(cnt_joined[j]);
        b += w[j] * static_cast<double>(cnt_omega[j]);
        c += w[j] * static_cast<double>(cnt_eta[j]);
        d += w[j] * static_cast<double>(cnt_avoid[j]);
    }
    DomainMarkovResult r;
    r.tail_mass = std::pow(q, max_len + 1);
    const double tail = r.tail_mass;
    r.lhs = b > 0 ? a / b : 0.0;
    r.rhs = d > 0 ? c / d : 0.0;
    r.deviation = std::abs(r.lhs - r.rhs);
    auto width = [tail](double num, double den) {
        if (den <= 0) return 1.0;
        double lo = num / (den + tail);
        double hi = std::min(1.0, (num + tail) / den);
        return hi - lo;
    };
    r.truncation_bound = width(a, b) + width(c, d);
    return r;
}

}  // namespace ust4
