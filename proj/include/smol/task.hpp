#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include <smol/types.hpp>

namespace smol {

/// A task scores a genome under a given actuator scaling factor alpha.
///
/// `evaluate` must be safe to call concurrently. A non-finite fitness marks a
/// failed evaluation; callers discard such results.
struct Task {
    std::string name;
    std::size_t genome_len = 0;
    std::size_t descriptor_dim = 0;
    bool deterministic = true;
    std::function<Evaluation(std::span<const double> genome, double alpha)> evaluate;
};

} // namespace smol
