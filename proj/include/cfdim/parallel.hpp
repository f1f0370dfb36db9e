#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace cfdim {

// Worker count: CFDIM_THREADS if set and positive, else hardware concurrency.
inline unsigned thread_count() {
    if (const char* env = std::getenv("CFDIM_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) {
                return static_cast<unsigned>(v);
            }
        } catch (...) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

// Evaluates fn(i) for i in [0, count) and returns the results in index
// order. Work is split across threads, but every result lands in its own
// slot, so any reduction the caller performs over the returned vector is
// independent of the thread count.
template <typename Fn>
auto parallel_map(std::size_t count, Fn&& fn, unsigned threads = thread_count())
    -> std::vector<decltype(fn(std::size_t{}))> {
    using Result = decltype(fn(std::size_t{}));
    std::vector<Result> out(count);
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            out[i] = fn(i);
        }
        return out;
    }
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < count; i += threads) {
                    out[i] = fn(i);
                }
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return out;
}

// Pairwise sum in a fixed binary tree over the index order.
template <typename T>
T tree_sum(const std::vector<T>& values, std::size_t lo, std::size_t hi) {
    if (hi <= lo) {
        return T{};
    }
    if (hi - lo == 1) {
        return values[lo];
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return tree_sum(values, lo, mid) + tree_sum(values, mid, hi);
}

template <typename T>
T tree_sum(const std::vector<T>& values) {
    return tree_sum(values, 0, values.size());
}

} // namespace cfdim
