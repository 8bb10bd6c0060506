#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace shelab {

inline int default_thread_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(hw);
}

/// Runs fn(chunk_index, begin, end) once per fixed-size chunk of [0, n).
/// The chunk decomposition does not depend on n_threads, so results written
/// into per-chunk or per-item slots reduce identically for any thread count.
template <class Fn>
void parallel_chunks(std::size_t n, std::size_t chunk_size, int n_threads, Fn&& fn) {
    if (n == 0) return;
    if (chunk_size == 0) chunk_size = 1;
    const std::size_t n_chunks = (n + chunk_size - 1) / chunk_size;
    if (n_threads <= 1 || n_chunks == 1) {
        for (std::size_t ci = 0; ci < n_chunks; ++ci)
            fn(ci, ci * chunk_size, std::min(n, (ci + 1) * chunk_size));
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t ci = next.fetch_add(1);
            if (ci >= n_chunks) return;
            fn(ci, ci * chunk_size, std::min(n, (ci + 1) * chunk_size));
        }
    };
    std::vector<std::thread> pool;
    const int used = int(std::min<std::size_t>(std::size_t(n_threads), n_chunks));
    pool.reserve(used);
    for (int t = 0; t < used; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

} // namespace shelab
