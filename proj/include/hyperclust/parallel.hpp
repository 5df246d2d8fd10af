#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace hyperclust {

// Worker count: HYPERCLUST_THREADS when set, otherwise the hardware count
// capped at 8.
inline int worker_count() {
    if (const char* env = std::getenv("HYPERCLUST_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(hw == 0 ? 1 : std::min(hw, 8u));
}

namespace detail {
inline thread_local bool inside_parallel_region = false;
}

// Runs fn(0..count-1) across workers. Results must be written into
// pre-sized slots indexed by the task id, which keeps aggregation
// order-independent of the scheduling. Nested calls run serially.
inline void parallel_for_tasks(int count, const std::function<void(int)>& fn) {
    const int workers =
        detail::inside_parallel_region ? 1 : std::min(worker_count(), count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            detail::inside_parallel_region = true;
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace hyperclust
