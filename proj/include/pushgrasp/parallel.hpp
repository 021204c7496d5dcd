#pragma once

#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace pg {

/// Run fn(0..n-1), fanning out to `workers` threads when workers > 1.
/// Tasks must write to disjoint slots; results are identical for any worker
/// count. The first task exception is rethrown after the join.
inline void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    int threads_n = std::min(workers, n);
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(static_cast<size_t>(threads_n));
    threads.reserve(static_cast<size_t>(threads_n));
    for (int t = 0; t < threads_n; ++t) {
        threads.emplace_back([&, t] {
            try {
                for (int i = t; i < n; i += threads_n) fn(i);
            } catch (...) {
                errors[static_cast<size_t>(t)] = std::current_exception();
            }
        });
    }
    for (auto& th : threads) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace pg
