#pragma once

/// @file types.hpp
/// @brief Core value types shared by every module: genomes, descriptors, solutions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace smol {

/// Flat real-valued parameter vector evolved by MAP-Elites.
using Genome = std::vector<double>;

/// Behavioural coordinates, normalized to the unit hypercube.
using Descriptor = std::vector<double>;

/// Result of evaluating one genome on a task.
struct Evaluation {
    double fitness = 0.0;
    Descriptor descriptor;
};

/// An archive occupant.
struct Solution {
    Genome genome;
    double fitness = 0.0;
    Descriptor descriptor;

    friend bool operator==(const Solution&, const Solution&) = default;
};

inline bool all_finite(std::span<const double> values)
{
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

/// Componentwise clamp into [0,1]. NaN components map to 0.
inline Descriptor clamp_descriptor(Descriptor d)
{
    for (auto& v : d)
        v = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
    return d;
}

} // namespace smol
