#pragma once

/// @file variation.hpp
/// @brief The iso+line operator.

#include <cmath>
#include <random>
#include <span>
#include <stdexcept>

#include <smol/random.hpp>
#include <smol/types.hpp>

namespace smol {

struct VariationParams {
    double sigma_iso = 0.005;
    double sigma_line = 0.05;

    void validate() const
    {
        if (!(std::isfinite(sigma_iso) && sigma_iso >= 0.0))
            throw std::invalid_argument("variation: sigma_iso must be finite and non-negative");
        if (!(std::isfinite(sigma_line) && sigma_line >= 0.0))
            throw std::invalid_argument("variation: sigma_line must be finite and non-negative");
    }
};

/// child_i = a_i + sigma_iso * eps_i + sigma_line * lambda * (b_i - a_i)
///
/// eps_i are independent standard normals, lambda is one standard normal shared
/// by all components. No bounds are applied. Draw order: lambda first, then
/// eps_0 .. eps_{n-1}.
inline Genome iso_line(std::span<const double> parent_a, std::span<const double> parent_b,
                       const VariationParams& params, Rng& rng)
{
    if (parent_a.size() != parent_b.size())
        throw std::invalid_argument("iso_line: parents differ in length");
    std::normal_distribution<double> normal(0.0, 1.0);
    const double lambda = normal(rng);
    Genome child(parent_a.size());
    for (std::size_t i = 0; i < child.size(); ++i) {
        const double eps = normal(rng);
        child[i] = parent_a[i] + params.sigma_iso * eps + params.sigma_line * lambda * (parent_b[i] - parent_a[i]);
    }
    return child;
}

} // namespace smol
