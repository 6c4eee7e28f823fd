#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace blhedge {

// Process-wide worker budget (set from --threads). Results never depend on
// it: jobs write into index-addressed slots and reductions run in index
// order afterwards.
inline std::atomic<int>& thread_budget() {
    static std::atomic<int> v{(int)std::max(1u, std::thread::hardware_concurrency())};
    return v;
}
inline int max_threads() { return thread_budget().load(); }
inline void set_max_threads(int n) { thread_budget().store(n < 1 ? 1 : n); }

template <typename Fn>
void parallel_for(std::int64_t count, Fn&& fn) {
    if (count <= 0) return;
    const int workers = (int)std::min<std::int64_t>(count, max_threads());
    if (workers <= 1) {
        for (std::int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::int64_t i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace blhedge
