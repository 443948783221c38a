#ifndef SUBDYN_PARALLEL_HPP
#define SUBDYN_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace subdyn {

/// Worker count: SUBDYN_THREADS if set and positive, else hardware concurrency.
inline int thread_count()
{
    if (const char* env = std::getenv("SUBDYN_THREADS")) {
        try {
            int n = std::stoi(env);
            if (n > 0) return n;
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// f(i) for i in [0, n) on up to `threads` workers; the first exception is
/// rethrown after all workers finish.
template <class F>
void parallel_for(std::size_t n, int threads, F&& f)
{
    const std::size_t T = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
    if (T <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < T; ++t)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> g(mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

} // namespace subdyn

#endif
