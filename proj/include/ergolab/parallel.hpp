#pragma once

#include <cstddef>
#include <cstdint>
#include <thread>
#include <vector>

namespace ergolab {

// Worker count used by estimator loops. Reads ERGOLAB_WORKERS when no
// override is set; falls back to the hardware count.
int worker_count();

// Test/CLI override; pass 0 to return to the environment setting.
void set_worker_count(int n);

// Runs fn(i) for i in [0, n) on worker_count() threads with a static
// contiguous partition. fn must write only to per-index state (slot i), which
// keeps results identical for every worker count.
template <class Fn>
void parallel_for_indexed(std::size_t n, Fn&& fn) {
    const int workers = worker_count();
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t w = static_cast<std::size_t>(workers);
    const std::size_t chunk = (n + w - 1) / w;
    std::vector<std::thread> threads;
    threads.reserve(w);
    for (std::size_t k = 0; k < w; ++k) {
        const std::size_t lo = k * chunk;
        if (lo >= n) break;
        const std::size_t hi = std::min(n, lo + chunk);
        threads.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : threads) t.join();
}

}  // namespace ergolab
