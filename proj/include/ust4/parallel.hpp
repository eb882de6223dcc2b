#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <optional>
#include <thread>
#include <vector>

#include "ust4/rng.hpp"

namespace ust4 {

/// Seed, worker count and optional wall-clock deadline shared by an experiment run.
struct RunContext {
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::optional<std::chrono::steady_clock::time_point> deadline;
    /// Set once any sample loop stopped early at the deadline.
    mutable std::atomic<bool> partial{false};

    RunContext() = default;
    RunContext(std::uint64_t s, unsigned w) : seed(s), workers(w) {}
    RunContext(const RunContext& o) : seed(o.seed), workers(o.workers), deadline(o.deadline), partial(o.partial.load()) {}

    bool expired() const { return deadline && std::chrono::steady_clock::now() >= *deadline; }
    void set_budget(double seconds) {
        deadline = std::chrono::steady_clock::now() +
                   std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(seconds));
    }
    /// Base stream of task t: seed hash64(seed, t).
    RngStream task_stream(std::uint64_t task) const { return RngStream(hash64(seed, task)); }
};

/// Evaluates f(i, rng_i) for i < n with rng_i = task_stream(task).split(i), on
/// ctx.workers threads. Results are returned in index order, so they do not
/// depend on the worker count. If the deadline passes, only the longest
/// completed prefix is returned and ctx.partial is set.
template <class R, class F>
std::vector<R> run_samples(std::uint64_t n, std::uint64_t task, const RunContext& ctx, F&& f) {
    std::vector<R> out(n);
    std::vector<char> done(n, 0);
    const RngStream base = ctx.task_stream(task);
    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> stop{false};
    auto worker = [&] {
        while (!stop.load(std::memory_order_relaxed)) {
            const std::uint64_t i = next.fetch_add(1);
            if (i >= n) return;
            if (ctx.expired()) {
                stop = true;
                return;
            }
            RngStream rng = base.split(i);
            out[i] = f(i, rng);
            done[i] = 1;
        }
    };
    const unsigned w = std::max(1u, std::min<unsigned>(ctx.workers, static_cast<unsigned>(std::min<std::uint64_t>(n, 1024))));
    if (w == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < w; ++k) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    std::uint64_t prefix = 0;
    while (prefix < n && done[prefix]) ++prefix;
    if (prefix < n) {
        ctx.partial = true;
        out.resize(prefix);
    }
    return out;
}

}  // namespace ust4
