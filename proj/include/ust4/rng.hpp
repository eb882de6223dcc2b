#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace ust4 {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Stable seed derivation: hash64(base, index).
constexpr std::uint64_t hash64(std::uint64_t base, std::uint64_t index) {
    return mix64(mix64(base) ^ (index * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

/// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

/// Counter-based random stream. Output block j of stream (seed, index) is
/// philox(key = seed, counter = (j, index)), so streams with distinct indices
/// never share a counter.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t index = 0);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t index() const { return index_; }

    /// Independent child stream; deterministic in (seed, index, j).
    RngStream split(std::uint64_t j) const { return RngStream(seed_, hash64(index_ ^ 0x5bd1e995u, j)); }

    std::uint64_t operator()() {
        if (pos_ == 2) refill();
        return buf_[pos_++];
    }
    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return std::numeric_limits<std::uint64_t>::max(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform on {0, ..., n-1}, unbiased (Lemire).
    std::uint64_t below(std::uint64_t n);

    /// Uniform direction in {0, ..., 7}; consumes 3 bits at a time.
    int direction() {
        if (dir_left_ == 0) {
            dir_bits_ = (*this)();
            dir_left_ = 21;
        }
        int d = static_cast<int>(dir_bits_ & 7u);
        dir_bits_ >>= 3;
        --dir_left_;
        return d;
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Number of failures before the first success, success probability p.
    std::uint64_t geometric(double p);

    double exponential(double rate);

    /// Poisson variate with the given mean.
    std::uint64_t poisson(double mean);

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t index_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buf_{};
    int pos_ = 2;
    std::uint64_t dir_bits_ = 0;
    int dir_left_ = 0;
};

}  // namespace ust4
