#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace relaxometer {

/// 0 means one worker per hardware thread.
inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) {
        return requested;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for i in [0, n) on up to `threads` workers pulling from a
/// shared counter. The exception from the lowest failing index is rethrown.
template <class Fn>
void parallel_for(std::int64_t n, unsigned threads, Fn&& fn) {
    const auto workers = static_cast<std::int64_t>(std::min<std::int64_t>(resolve_threads(threads), n));
    if (workers <= 1) {
        for (std::int64_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::mutex guard;
    std::int64_t failed_at = n;
    std::exception_ptr failure;
    auto body = [&] {
        for (std::int64_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(guard);
                if (i < failed_at) {
                    failed_at = i;
                    failure = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (std::int64_t w = 0; w < workers; ++w) {
        pool.emplace_back(body);
    }
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

} // namespace relaxometer
