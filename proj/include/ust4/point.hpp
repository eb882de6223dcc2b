#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <string>

namespace ust4 {

inline constexpr int kDim = 4;
inline constexpr int kDegree = 2 * kDim;

/// A site of Z^4.
struct Point {
    std::array<std::int64_t, kDim> x{};

    constexpr Point() = default;
    constexpr Point(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) : x{a, b, c, d} {}

    constexpr std::int64_t& operator[](int i) { return x[static_cast<std::size_t>(i)]; }
    constexpr std::int64_t operator[](int i) const { return x[static_cast<std::size_t>(i)]; }

    friend constexpr bool operator==(const Point&, const Point&) = default;
    friend constexpr auto operator<=>(const Point&, const Point&) = default;

    friend constexpr Point operator+(Point a, const Point& b) {
        for (int i = 0; i < kDim; ++i) a[i] += b[i];
        return a;
    }
    friend constexpr Point operator-(Point a, const Point& b) {
        for (int i = 0; i < kDim; ++i) a[i] -= b[i];
        return a;
    }
    constexpr Point operator-() const { return Point{-x[0], -x[1], -x[2], -x[3]}; }
};

inline constexpr Point kOrigin{0, 0, 0, 0};

/// Unit vector for direction d in the order +e0, -e0, +e1, -e1, +e2, -e2, +e3, -e3.
constexpr Point unit(int d) {
    Point p;
    p[d >> 1] = (d & 1) ? -1 : 1;
    return p;
}

/// Direction pointing back along d.
constexpr int opposite(int d) { return d ^ 1; }

/// Neighbor in direction d. Throws on coordinate overflow.
Point step(const Point& p, int d);

/// The 8 neighbors in direction order.
std::array<Point, kDegree> neighbors(const Point& p);

/// Direction index taking a to b, or -1 if they are not adjacent.
int direction_between(const Point& a, const Point& b);

std::int64_t norm_inf(const Point& p);
std::int64_t norm1(const Point& p);
std::int64_t norm2_sq(const Point& p);
double norm2(const Point& p);

std::string to_string(const Point& p);

/// 64-bit key for points with every coordinate in [-32768, 32767].
/// Key 0 is never produced, so it can serve as an empty-slot marker.
inline constexpr std::int64_t kPackLimit = 32767;

inline bool packable(const Point& p) {
    for (int i = 0; i < kDim; ++i)
        if (p[i] < -kPackLimit || p[i] > kPackLimit) return false;
    return true;
}

inline std::uint64_t pack(const Point& p) {
    std::uint64_t k = 0;
    for (int i = 0; i < kDim; ++i)
        k = (k << 16) | static_cast<std::uint64_t>(static_cast<std::uint16_t>(p[i] + 32768));
    return k;
}

inline Point unpack(std::uint64_t k) {
    Point p;
    for (int i = kDim - 1; i >= 0; --i) {
        p[i] = static_cast<std::int64_t>(k & 0xffffu) - 32768;
        k >>= 16;
    }
    return p;
}

/// Packed-key offset of a unit step in direction d.
inline constexpr std::uint64_t pack_delta(int d) { return std::uint64_t{1} << (16 * (kDim - 1 - (d >> 1))); }

inline std::uint64_t pack_step(std::uint64_t k, int d) {
    return (d & 1) ? k - pack_delta(d) : k + pack_delta(d);
}

/// Steps that can be taken from a key accepted by packed_has_margin() without
/// leaving the packable range.
inline constexpr std::uint64_t kPackMargin = 4096;

inline bool packed_has_margin(std::uint64_t k) {
    for (int i = 0; i < kDim; ++i) {
        std::uint64_t f = (k >> (16 * i)) & 0xffffu;
        if (f <= kPackMargin || f >= 65536 - kPackMargin) return false;
    }
    return true;
}

struct PointHash {
    std::size_t operator()(const Point& p) const noexcept {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL;
        for (int i = 0; i < kDim; ++i) {
            h ^= static_cast<std::uint64_t>(p[i]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return static_cast<std::size_t>(h);
    }
};

}  // namespace ust4

template <>
struct std::hash<ust4::Point> : ust4::PointHash {};
