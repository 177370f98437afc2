#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace grainflow {

/// Worker count: GRAINFLOW_THREADS if set to a positive integer, otherwise
/// the hardware concurrency.
inline unsigned thread_count()
{
    if (const char* env = std::getenv("GRAINFLOW_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for i in [0, n). Work is split into contiguous blocks; the
/// caller writes results into index-addressed slots so any later reduction
/// is independent of the thread count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned threads = thread_count())
{
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            // Strided assignment balances the triangular pair loops.
            for (std::size_t i = w; i < n; i += threads) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace grainflow
