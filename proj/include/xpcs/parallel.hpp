#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace xpcs {

/// Number of worker threads to use when the caller passes 0.
/// Honors XPCS_THREADS, falls back to the hardware concurrency.
inline unsigned default_thread_count()
{
    if (char const* env = std::getenv("XPCS_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Run fn(begin, end) over contiguous chunks of [0, n) on up to `threads` workers.
/// Chunk boundaries depend only on n and the thread count, and each index is
/// handled exactly once, so callers writing disjoint outputs get results that
/// do not depend on scheduling.
template <typename Fn>
void parallel_for_chunks(std::size_t n, unsigned threads, Fn&& fn)
{
    if (threads == 0) threads = default_thread_count();
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        if (n) fn(std::size_t{0}, n);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        std::size_t begin = t * chunk;
        std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn)
{
    parallel_for_chunks(n, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) fn(i);
    });
}

} // namespace xpcs
