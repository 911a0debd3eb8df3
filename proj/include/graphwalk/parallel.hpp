#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

#include "graphwalk/numeric.hpp"
#include "graphwalk/rng.hpp"

namespace graphwalk {

// Embarrassingly parallel sampling.  Work is cut into a fixed number of
// chunks with rng streams split deterministically from the master seed by
// chunk index, and chunk accumulators are merged in chunk order, so the
// result depends on neither thread scheduling nor the worker count.
template <class PerSample>
Welford parallel_samples(std::int64_t samples, int workers,
                         std::uint64_t seed, PerSample per_sample) {
    if (workers < 1) workers = 1;
    const std::int64_t chunk_count =
        samples < 256 ? (samples > 0 ? samples : 1) : 256;
    std::vector<Welford> parts(static_cast<std::size_t>(chunk_count));

    auto run_chunk = [&](std::int64_t c) {
        const std::int64_t lo = samples * c / chunk_count;
        const std::int64_t hi = samples * (c + 1) / chunk_count;
        Rng rng = Rng::for_worker(seed, std::uint64_t(c));
        Welford acc;
        for (std::int64_t i = lo; i < hi; ++i) acc.add(per_sample(rng));
        parts[std::size_t(c)] = acc;
    };

    if (workers == 1) {
        for (std::int64_t c = 0; c < chunk_count; ++c) run_chunk(c);
    } else {
        std::atomic<std::int64_t> next{0};
        std::vector<std::thread> threads;
        threads.reserve(std::size_t(workers));
        for (int w = 0; w < workers; ++w) {
            threads.emplace_back([&] {
                for (;;) {
                    const std::int64_t c = next.fetch_add(1);
                    if (c >= chunk_count) return;
                    run_chunk(c);
                }
            });
        }
        for (auto& t : threads) t.join();
    }

    Welford total;
    for (const auto& p : parts) total.merge(p);
    return total;
}

}  // namespace graphwalk
