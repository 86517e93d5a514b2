#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fdlab {

namespace detail {
inline std::atomic<unsigned>& thread_cap() {
    static std::atomic<unsigned> cap{0};
    return cap;
}
} // namespace detail

// 0 restores the default (hardware parallelism).
inline void set_max_threads(unsigned n) { detail::thread_cap().store(n); }

inline unsigned max_threads() {
    unsigned cap = detail::thread_cap().load();
    if (cap == 0) cap = std::max(1u, std::thread::hardware_concurrency());
    return cap;
}

// Calls fn(i) for every i in [0, count). Work is handed out dynamically, so
// fn must not depend on which thread runs it.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    unsigned workers = static_cast<unsigned>(std::min<std::size_t>(max_threads(), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned t = 1; t < workers; ++t) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

// Pairwise combination of values[0..n) in a fixed tree shape.
template <class T, class Combine>
T tree_combine(std::vector<T> values, const T& identity, Combine combine) {
    if (values.empty()) return identity;
    while (values.size() > 1) {
        std::size_t half = (values.size() + 1) / 2;
        for (std::size_t i = 0; i < values.size() / 2; ++i)
            values[i] = combine(values[2 * i], values[2 * i + 1]);
        if (values.size() % 2 == 1) values[half - 1] = values.back();
        values.resize(half);
    }
    return values.front();
}

// Each task result depends only on its index and partial results are merged
// in a fixed tree, so the outcome does not depend on the thread count.
template <class T, class Task, class Combine>
T parallel_reduce(std::size_t count, const T& identity, Task&& task, Combine combine) {
    std::vector<T> partial(count, identity);
    parallel_for(count, [&](std::size_t i) { partial[i] = task(i); });
    return tree_combine(std::move(partial), identity, combine);
}

} // namespace fdlab
