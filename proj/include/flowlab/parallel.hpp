#ifndef FLOWLAB_PARALLEL_HPP
#define FLOWLAB_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace flowlab {

/// Runs fn(i) for i in [0, count) on `workers` threads (0 = hardware count).
/// Work items must write results into per-index slots; chunks are claimed
/// through an atomic cursor, so scheduling never affects what any index
/// computes, only when.
inline void parallel_for_indexed(std::size_t count, unsigned workers,
                                 const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    unsigned w = workers ? workers : std::thread::hardware_concurrency();
    if (w <= 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    if (w > count) w = static_cast<unsigned>(count);
    std::atomic<std::size_t> cursor{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (unsigned t = 0; t < w; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = cursor.fetch_add(1);
                if (i >= count || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

} // namespace flowlab

#endif
