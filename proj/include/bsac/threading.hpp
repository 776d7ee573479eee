#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace bsac {

/// Worker cap from BSAC_THREADS (0 or unset = hardware concurrency), never
/// more than `jobs`.
inline std::size_t worker_count(std::size_t jobs) {
    std::size_t cap = 0;
    if (const char* env = std::getenv("BSAC_THREADS")) {
        char* end = nullptr;
        const long parsed = std::strtol(env, &end, 10);
        if (end != env && parsed > 0) cap = static_cast<std::size_t>(parsed);
    }
    if (cap == 0) {
        cap = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    }
    return std::min(cap, std::max<std::size_t>(1, jobs));
}

/// Runs fn(0..count-1) on a small worker pool. Jobs must be independent;
/// results written to per-index slots stay deterministic under any schedule.
/// The first exception thrown by a job is rethrown after all workers join.
inline void run_jobs(std::size_t count, const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    const std::size_t workers = worker_count(count);
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (!failed.load(std::memory_order_relaxed)) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) break;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed.store(true);
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace bsac
