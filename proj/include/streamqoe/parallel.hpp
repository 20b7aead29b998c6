#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace streamqoe::detail {

inline unsigned worker_count() {
    if (const char* env = std::getenv("STREAMQOE_THREADS")) {
        long v = std::atol(env);
        if (v > 0) return static_cast<unsigned>(v);
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? hc : 1;
}

// Map-reduce over [0, n) in fixed-size chunks. Chunk boundaries do not
// depend on the worker count and partials are combined in chunk order,
// so floating-point reductions are reproducible on any machine.
template <class Acc, class Work>
Acc chunked_reduce(std::uint64_t n, std::uint64_t chunk_size, Work work) {
    if (n == 0) return Acc{};
    const std::uint64_t chunks = (n + chunk_size - 1) / chunk_size;
    std::vector<Acc> partials(chunks);
    std::atomic<std::uint64_t> next{0};

    auto runner = [&] {
        for (;;) {
            const std::uint64_t c = next.fetch_add(1);
            if (c >= chunks) return;
            const std::uint64_t lo = c * chunk_size;
            const std::uint64_t hi = std::min(n, lo + chunk_size);
            work(lo, hi, partials[c]);
        }
    };

    const unsigned workers = std::min<std::uint64_t>(worker_count(), chunks);
    if (workers <= 1) {
        runner();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned i = 0; i < workers; ++i) pool.emplace_back(runner);
        for (auto& t : pool) t.join();
    }

    Acc total{};
    for (auto& p : partials) total.combine(p);
    return total;
}

inline constexpr std::uint64_t kDefaultChunk = 4096;

} // namespace streamqoe::detail
