#pragma once

/// @file scaled_arm.hpp
/// @brief Planar redundant arm whose joint range scales with alpha.
///
/// Joint i bends by alpha * joint_limit * tanh(g_i). The descriptor is the end
/// effector position mapped from [-1,1]^2 into [0,1]^2, the fitness is minus
/// the variance of the joint angles (an energy proxy, maximal when idle).

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <smol/task.hpp>
#include <smol/types.hpp>

namespace smol::tasks {

struct ScaledArmParams {
    std::size_t n_joints = 8;
    double joint_limit = std::numbers::pi / 2.0;

    void validate() const
    {
        if (n_joints < 2)
            throw std::invalid_argument("scaled_arm: joints must be at least 2");
        if (!(std::isfinite(joint_limit) && joint_limit > 0.0))
            throw std::invalid_argument("scaled_arm: joint_limit must be positive");
    }
};

inline std::vector<double> scaled_arm_angles(std::span<const double> genome, double alpha,
                                             const ScaledArmParams& params)
{
    std::vector<double> theta(genome.size());
    for (std::size_t i = 0; i < genome.size(); ++i)
        theta[i] = alpha * params.joint_limit * std::tanh(genome[i]);
    return theta;
}

inline Evaluation scaled_arm_evaluate(std::span<const double> genome, double alpha, const ScaledArmParams& params)
{
    if (genome.size() != params.n_joints)
        throw std::invalid_argument("scaled_arm: genome length " + std::to_string(genome.size()) + " != n_joints "
                                    + std::to_string(params.n_joints));
    if (!(alpha > 0.0))
        throw std::invalid_argument("scaled_arm: alpha must be positive");

    const std::vector<double> theta = scaled_arm_angles(genome, alpha, params);
    const double n = static_cast<double>(theta.size());
    const double link = 1.0 / n;

    double phi = 0.0, x = 0.0, y = 0.0;
    for (double t : theta) {
        phi += t;
        x += link * std::cos(phi);
        y += link * std::sin(phi);
    }

    // Variance about the first angle, so identical angles give exactly zero.
    double shift_mean = 0.0;
    for (double t : theta)
        shift_mean += t - theta[0];
    shift_mean /= n;
    double var = 0.0;
    for (double t : theta) {
        const double dev = (t - theta[0]) - shift_mean;
        var += dev * dev;
    }
    var /= n;

    return {0.0 - var, clamp_descriptor({(x + 1.0) / 2.0, (y + 1.0) / 2.0})};
}

inline Task make_scaled_arm_task(const ScaledArmParams& params)
{
    params.validate();
    return Task{"scaled_arm", params.n_joints, 2, true,
                [params](std::span<const double> g, double alpha) { return scaled_arm_evaluate(g, alpha, params); }};
}

} // namespace smol::tasks
