// parallel.hpp — chunked index-range parallelism over std::thread

#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace spinboson::detail {

// Runs fn(i) for i in [0, n). Work is handed out in chunks; the first
// exception thrown by any worker is rethrown on the calling thread.
template <typename Fn>
void parallel_for(int n, Fn&& fn) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    constexpr int grain = 256;
    if (n <= grain || hw == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        try {
            for (;;) {
                const int start = next.fetch_add(grain);
                if (start >= n) return;
                const int stop = std::min(n, start + grain);
                for (int i = start; i < stop; ++i) fn(i);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
            next.store(n);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(hw - 1);
    for (unsigned t = 1; t < hw; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace spinboson::detail
