#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace ganaudit {

// Runs fn(i) for i in [0, n) on up to `workers` threads. Work items must be
// independent; each writes only its own output slot, so results match serial
// execution exactly.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::size_t count = std::min<std::size_t>(workers, n);
    std::vector<std::thread> pool;
    pool.reserve(count);
    for (std::size_t w = 0; w < count; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += count) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace ganaudit
