#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace lincntk {

/// Evaluates fn(0), ..., fn(count - 1) on up to `threads` worker threads and
/// returns the results in index order. Any reduction over the result is then
/// independent of the thread count.
template <typename T>
std::vector<T> parallel_indexed(std::size_t count, unsigned threads,
                                const std::function<T(std::size_t)>& fn)
{
    std::vector<T> results(count);
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            results[i] = fn(i);
        return results;
    }

    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < count; i += workers)
                        results[i] = fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                }
            });
        }
    }
    if (failure)
        std::rethrow_exception(failure);
    return results;
}

}  // namespace lincntk
