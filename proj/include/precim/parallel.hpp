#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace precim {

/// Number of workers implied by a --threads style setting (0 = auto).
inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Run fn(i) for i in [begin, end) on up to `threads` workers.
///
/// Work is handed out through a shared atomic-style counter; each index is
/// processed exactly once and writes only to its own output slot, so results
/// do not depend on the worker count. The first exception thrown by any
/// worker is re-thrown on the caller after all workers join.
inline void parallel_for(std::int64_t begin, std::int64_t end,
                         const std::function<void(std::int64_t)>& fn,
                         int threads = 0) {
    const std::int64_t count = end - begin;
    if (count <= 0) return;
    int workers = std::min<std::int64_t>(resolve_threads(threads), count);
    if (workers <= 1) {
        for (std::int64_t i = begin; i < end; ++i) fn(i);
        return;
    }

    std::mutex mtx;
    std::int64_t next = begin;
    std::exception_ptr first_error;

    auto body = [&]() {
        for (;;) {
            std::int64_t i;
            {
                std::lock_guard<std::mutex> lock(mtx);
                if (next >= end || first_error) return;
                i = next++;
            }
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mtx);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace precim
