#include "ust4/point.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ust4 {

Point step(const Point& p, int d) {
    Point q = p;
    std::int64_t& c = q[d >> 1];
    if (d & 1) {
        if (c == std::numeric_limits<std::int64_t>::min()) throw std::overflow_error("coordinate underflow");
        --c;
    } else {
        if (c == std::numeric_limits<std::int64_t>::max()) throw std::overflow_error("coordinate overflow");
        ++c;
    }
    return q;
}

std::array<Point, kDegree> neighbors(const Point& p) {
    std::array<Point, kDegree> out;
    for (int d = 0; d < kDegree; ++d) out[static_cast<std::size_t>(d)] = step(p, d);
    return out;
}

int direction_between(const Point& a, const Point& b) {
    Point diff = b - a;
    int axis = -1;
    for (int i = 0; i < kDim; ++i) {
        if (diff[i] == 0) continue;
        if (axis >= 0 || (diff[i] != 1 && diff[i] != -1)) return -1;
        axis = i;
    }
    if (axis < 0) return -1;
    return 2 * axis + (diff[axis] < 0 ? 1 : 0);
}

std::int64_t norm_inf(const Point& p) {
    std::int64_t m = 0;
    for (int i = 0; i < kDim; ++i) m = std::max(m, std::abs(p[i]));
    return m;
}

std::int64_t norm1(const Point& p) {
    std::int64_t s = 0;
    for (int i = 0; i < kDim; ++i) s += std::abs(p[i]);
    return s;
}

std::int64_t norm2_sq(const Point& p) {
    std::int64_t s = 0;
    for (int i = 0; i < kDim; ++i) s += p[i] * p[i];
    return s;
}

double norm2(const Point& p) { return std::sqrt(static_cast<double>(norm2_sq(p))); }

std::string to_string(const Point& p) {
    return std::to_string(p[0]) + " " + std::to_string(p[1]) + " " + std::to_string(p[2]) + " " +
           std::to_string(p[3]);
}

}  // namespace ust4
