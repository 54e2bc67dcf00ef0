#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace rmplate {

// Runs body(i) for i in [0, n) on up to `jobs` threads, in contiguous
// chunks. The first exception thrown by any chunk is rethrown.
template <class Body>
void parallel_for(std::size_t n, int jobs, Body &&body) {
    const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), std::max<std::size_t>(n, 1));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t k = 0; k < threads; ++k)
        pool.emplace_back([&, k] {
            try {
                for (std::size_t i = n * k / threads; i < n * (k + 1) / threads; ++i)
                    body(i);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        });
    for (auto &t : pool)
        t.join();
    for (auto &e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace rmplate
