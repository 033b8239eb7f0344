#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace twistlab::util {

/// Runs fn(i) for i in [0, count) over `threads` workers on disjoint chunks.
/// Callers write disjoint outputs, so results do not depend on scheduling.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, int threads = 0) {
    unsigned hw = std::thread::hardware_concurrency();
    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : (hw ? hw : 2);
    if (workers <= 1 || count < 2 * workers) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t lo = w * chunk;
        std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace twistlab::util
