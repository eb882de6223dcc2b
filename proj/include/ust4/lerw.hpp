#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ust4/flat_map.hpp"
#include "ust4/walk.hpp"

namespace ust4 {

/// Chronological loop-erasure of a finite path.
///
/// ell[i] is the walk time at which le_path[i] is entered for the last time:
/// ell[0] = 0 and ell[i+1] = 1 + (last visit to le_path[i]). rho[n] for
/// 0 <= n <= length is max{m : ell[m] <= n}, so ell[n] <= m iff rho[m] >= n.
struct LoopErasure {
    LatticePath le_path;
    std::vector<std::size_t> ell;
    std::vector<std::size_t> rho;
};

LoopErasure loop_erase(const LatticePath& path);

/// LE^R(w) = reverse of LE(reverse of w).
LatticePath reverse_loop_erase(const LatticePath& path);

/// Incremental loop-erasure keyed on packed points. Each stack entry stores
/// the time it was pushed, which is its ell value in the erasure of the walk
/// fed so far.
class StreamingErasure {
public:
    explicit StreamingErasure(const Point& start, std::size_t expected_length = 64);

    /// Feed the next walk site; it must neighbour the current endpoint.
    void feed(const Point& next);
    /// Feed by direction; no neighbour check needed.
    void feed_direction(int d);

    std::size_t time() const { return time_; }
    std::size_t size() const { return keys_.size(); }
    const Point endpoint() const { return unpack(current_); }

    /// Current stack, i.e. LE of the prefix fed so far.
    LatticePath path() const;
    const std::vector<std::uint64_t>& keys() const { return keys_; }
    const std::vector<std::size_t>& times() const { return times_; }

    /// Number of stack points with ell <= n, minus one: rho_n relative to the
    /// walk fed so far. Requires n <= time().
    std::size_t rho(std::size_t n) const;
    /// eta_n = max{ell_k <= n}.
    std::size_t eta(std::size_t n) const;
    /// Stack prefix with ell <= n (LE_infinity(X^n) relative to the fed horizon).
    LatticePath infinite_prefix(std::size_t n) const;

    bool contains(std::uint64_t key) const { return pos_.contains(key); }

private:
    void push_key(std::uint64_t k);

    std::vector<std::uint64_t> keys_;
    std::vector<std::size_t> times_;
    FlatMap<std::uint32_t> pos_;
    std::uint64_t current_;
    std::size_t time_ = 0;
};

/// Loop-erasure of srw_until.
std::pair<LoopErasure, StopOutcome> lerw_to_target(const Point& start, const PointSet& target,
                                                   std::int64_t escape_radius, RngStream& rng,
                                                   std::uint64_t horizon = 1'000'000'000ULL);

struct ReversibilityResult {
    double max_deviation = 0.0;
    /// Number of n for which the two sides are nonzero.
    int nonzero_terms = 0;
    std::vector<std::uint64_t> lhs_counts, rhs_counts;
};

/// Exact enumeration, for every n <= max_len, of
///   #{walks from eta_0: LE(X^n) = eta, X_1..X_n not in A} and
///   #{walks from eta_m: LE(X^n) = reverse(eta), X_0..X_{n-1} not in A}.
/// max_deviation is the largest |difference| / 8^n.
ReversibilityResult check_reversibility(int max_len, const LatticePath& eta, const std::vector<Point>& A);

struct DomainMarkovResult {
    double lhs = 0.0, rhs = 0.0;
    double deviation = 0.0;
    /// Rigorous bound on |computed - exact| summed over both sides.
    double truncation_bound = 0.0;
    /// Geometric tail mass beyond max_len, (t/(t+1))^(max_len+1).
    double tail_mass = 0.0;
};

/// Both sides of the domain Markov identity for a walk killed at geometric time
/// of mean t, with T truncated at max_len.
DomainMarkovResult check_domain_markov(double mean_t, const LatticePath& omega, const LatticePath& eta, int max_len);

}  // namespace ust4
