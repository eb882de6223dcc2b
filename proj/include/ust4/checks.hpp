#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ust4/point.hpp"

namespace ust4::checks {

struct CheckResult {
    int id = 0;
    std::string title;
    bool pass = false;
    /// One line per measured quantity with its tolerance.
    std::vector<std::string> details;
    double seconds = 0;
};

struct CheckInfo {
    int id;
    const char* title;
    /// Exact or machine-precision check (the structural suite).
    bool structural;
};

/// Acceptance criteria 1..16.
const std::vector<CheckInfo>& catalogue();

/// Runs criterion `id` with the given seed on `workers` threads. Throws
/// std::out_of_range for an unknown id.
CheckResult run(int id, std::uint64_t seed = 1, unsigned workers = 1);

/// First-cycle-removal loop-erasure: repeatedly splice out the earliest closed loop.
std::vector<Point> first_cycle_removal(std::vector<Point> w);

}  // namespace ust4::checks
