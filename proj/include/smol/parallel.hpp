#pragma once

/// @file parallel.hpp
/// @brief Order-preserving fan-out of task evaluations over worker threads.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include <smol/task.hpp>
#include <smol/types.hpp>

namespace smol {

inline std::size_t default_workers()
{
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Evaluates every genome at `alpha`. Result i always belongs to genome i,
/// whatever the worker count; failed evaluations (non-finite fitness or
/// descriptor, or a thrown exception) come back as std::nullopt.
inline std::vector<std::optional<Solution>> evaluate_batch(std::span<const Genome> genomes, const Task& task,
                                                           double alpha, std::size_t workers = 1)
{
    std::vector<std::optional<Solution>> results(genomes.size());
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            try {
                Evaluation e = task.evaluate(genomes[i], alpha);
                if (std::isfinite(e.fitness) && all_finite(e.descriptor))
                    results[i] = Solution{genomes[i], e.fitness, std::move(e.descriptor)};
            } catch (const std::exception&) {
                // counted as a discard by the caller
            }
        }
    };

    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, genomes.size()));
    if (workers == 1) {
        work(0, genomes.size());
        return results;
    }
    const std::size_t chunk = (genomes.size() + workers - 1) / workers;
    {
        std::vector<std::jthread> threads;
        threads.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(genomes.size(), begin + chunk);
            if (begin >= end)
                break;
            threads.emplace_back(work, begin, end);
        }
    } // joined
    return results;
}

} // namespace smol
