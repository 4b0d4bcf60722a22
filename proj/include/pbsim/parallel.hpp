#ifndef PBSIM_PARALLEL_HPP
#define PBSIM_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace pbsim {

/// Runs fn(i) for i in [0, count) on up to `jobs` threads and returns the
/// results in index order, so the output does not depend on scheduling.
/// fn receives (index, worker id); each worker id is used by one thread.
template <class F>
auto parallel_map(std::size_t count, unsigned jobs, F&& fn) {
    using R = std::invoke_result_t<F&, std::size_t, unsigned>;
    std::vector<R> out(count);
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) out[i] = fn(i, 0u);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next++; i < count; i = next++) out[i] = fn(i, w);
            } catch (...) {
                std::lock_guard lk(err_mu);
                if (!err) err = std::current_exception();
                next = count;
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
    return out;
}

inline unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

} // namespace pbsim

#endif // PBSIM_PARALLEL_HPP
