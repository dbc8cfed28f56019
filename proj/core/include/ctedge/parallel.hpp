#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace ctedge {

// Global cap on worker threads (defaults to the hardware count). The CLI
// exposes it as --threads.
void set_max_threads(int n);
int max_threads();

// Runs fn(i) for i in [0, n) on up to max_threads() workers, statically
// chunked. Callers must write to disjoint slots; results are then identical
// for every worker count.
template <class Fn>
void parallel_for(int n, Fn&& fn) {
    if (n <= 0) return;
    int workers = std::min(n, max_threads());
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    const int chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        const int lo = w * chunk;
        const int hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace ctedge
