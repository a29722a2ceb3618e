#pragma once

#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace glc {

// Deterministic parallel loop: fn(i) is called exactly once for each
// i in [0, count); workers pull indices from a shared atomic-free block
// partition, and callers must write results into preallocated slots keyed by
// i (never append). With jobs <= 1 this degrades to a plain serial loop, so
// output bytes never depend on the job count.
template <typename Fn>
void parallel_for(int64_t count, int jobs, Fn&& fn) {
    if (count <= 0) return;
    if (jobs > count) jobs = static_cast<int>(count);
    if (jobs <= 1) {
        for (int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mu;
    pool.reserve(static_cast<size_t>(jobs));
    for (int w = 0; w < jobs; ++w) {
        pool.emplace_back([&, w] {
            // Strided assignment keeps per-worker load balanced when cost
            // varies smoothly with i (e.g. node solves in id order).
            for (int64_t i = w; i < count; i += jobs) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

inline int default_jobs() {
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace glc
