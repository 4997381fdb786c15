#pragma once

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

namespace coverplan {

/**
 * Run f(i) for i in [0, n) across hardware threads. Work items must be
 * independent; callers that aggregate should write into per-index slots and
 * reduce sequentially afterwards so results do not depend on scheduling.
 */
template <class F>
void parallel_for(long long n, F&& f, int num_threads = 0) {
    if (n <= 0) return;
    int hw = num_threads > 0 ? num_threads
                             : int(std::thread::hardware_concurrency());
    if (hw <= 1 || n == 1) {
        for (long long i = 0; i < n; ++i) f(i);
        return;
    }
    hw = int(std::min<long long>(hw, n));
    std::vector<std::thread> pool;
    pool.reserve(size_t(hw));
    for (int t = 0; t < hw; ++t) {
        pool.emplace_back([&, t]() {
            for (long long i = t; i < n; i += hw) f(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace coverplan
