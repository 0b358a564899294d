#pragma once

/// @file schedules.hpp
/// @brief Phase-indexed actuator-strength (alpha) schedules and extinction events.
///
/// A run is split into `total_phases` equal phases. Every schedule except
/// Constant ramps over the first `total_phases - final_fixed_phases` phases and
/// then holds alpha at exactly 1 so that final scores are compared under the
/// standard body. Alpha is evaluated at the start of a phase and held for the
/// whole phase.

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include <smol/archive.hpp>
#include <smol/random.hpp>

namespace smol {

namespace schedule {
struct Constant {
    double alpha = 1.0;
};
/// Strong start, linear decay 1.5 -> 1.0.
struct Smol {};
/// Weak start, linear growth 0.5 -> 1.0.
struct SmolReverse {};
/// 0.7 -> 1.4 (peak) -> 1.0, piecewise linear.
struct SmolHuman {};
/// Fresh uniform draw in [lo, hi] every phase.
struct RandomUniform {
    double lo = 0.5;
    double hi = 1.5;
};
} // namespace schedule

using ScheduleKind
    = std::variant<schedule::Constant, schedule::Smol, schedule::SmolReverse, schedule::SmolHuman, schedule::RandomUniform>;

inline constexpr double smol_start = 1.5;
inline constexpr double smol_reverse_start = 0.5;
inline constexpr double smol_human_start = 0.7;
inline constexpr double smol_human_peak = 1.4;
inline constexpr double standard_alpha = 1.0;

struct ScheduleConfig {
    ScheduleKind kind = schedule::Constant{};
    std::size_t total_phases = 100;
    std::size_t final_fixed_phases = 10;
    double extinction_sigma = 0.0;
    /// SmolHuman peak position as a fraction of total_phases (30 of 100 by default).
    double human_peak_fraction = 0.3;

    std::size_t ramp_phases() const { return total_phases - final_fixed_phases; }

    std::size_t human_peak_phase() const
    {
        return static_cast<std::size_t>(std::llround(human_peak_fraction * static_cast<double>(total_phases)));
    }

    void validate() const
    {
        if (total_phases == 0)
            throw std::invalid_argument("schedule: total_phases must be positive");
        if (final_fixed_phases >= total_phases)
            throw std::invalid_argument("schedule: final_fixed_phases must be smaller than total_phases");
        if (!(extinction_sigma >= 0.0 && extinction_sigma <= 1.0))
            throw std::invalid_argument("schedule: extinction_sigma must lie in [0,1]");
        if (const auto* c = std::get_if<schedule::Constant>(&kind); c && !(std::isfinite(c->alpha) && c->alpha > 0.0))
            throw std::invalid_argument("schedule: constant_alpha must be positive");
        if (const auto* r = std::get_if<schedule::RandomUniform>(&kind);
            r && !(std::isfinite(r->hi) && r->lo > 0.0 && r->lo <= r->hi))
            throw std::invalid_argument("schedule: random_lo and random_hi need 0 < random_lo <= random_hi");
        if (std::holds_alternative<schedule::SmolHuman>(kind)) {
            const std::size_t peak = human_peak_phase();
            if (peak == 0 || peak >= ramp_phases())
                throw std::invalid_argument("schedule: human_peak_fraction must put the smol_human peak strictly inside the ramp");
        }
    }
};

inline std::string_view schedule_name(const ScheduleKind& kind)
{
    return std::visit(
        [](const auto& k) -> std::string_view {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, schedule::Constant>)
                return "constant";
            else if constexpr (std::is_same_v<K, schedule::Smol>)
                return "smol";
            else if constexpr (std::is_same_v<K, schedule::SmolReverse>)
                return "smol_reverse";
            else if constexpr (std::is_same_v<K, schedule::SmolHuman>)
                return "smol_human";
            else
                return "random";
        },
        kind);
}

/// Parses a schedule name; parameters (constant alpha, random range) keep their defaults.
inline ScheduleKind parse_schedule_name(std::string_view name)
{
    if (name == "constant")
        return schedule::Constant{};
    if (name == "smol")
        return schedule::Smol{};
    if (name == "smol_reverse")
        return schedule::SmolReverse{};
    if (name == "smol_human")
        return schedule::SmolHuman{};
    if (name == "random")
        return schedule::RandomUniform{};
    throw std::invalid_argument("unknown schedule '" + std::string(name)
                                + "' (expected constant, smol, smol_reverse, smol_human or random)");
}

namespace detail {
inline double lerp(double from, double to, double t) { return from + (to - from) * t; }
} // namespace detail

/// Alpha for `phase`. Only RandomUniform consumes `rng`, one draw per call
/// before the fixed window.
inline double alpha_at(const ScheduleConfig& config, std::size_t phase, Rng& rng)
{
    if (phase >= config.total_phases)
        throw std::out_of_range("alpha_at: phase " + std::to_string(phase) + " outside [0, "
                                + std::to_string(config.total_phases) + ")");
    if (const auto* c = std::get_if<schedule::Constant>(&config.kind))
        return c->alpha;

    const std::size_t ramp = config.ramp_phases();
    if (phase >= ramp)
        return standard_alpha;
    const double t = static_cast<double>(phase) / static_cast<double>(ramp);

    return std::visit(
        [&](const auto& k) -> double {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, schedule::Smol>) {
                return detail::lerp(smol_start, standard_alpha, t);
            } else if constexpr (std::is_same_v<K, schedule::SmolReverse>) {
                return detail::lerp(smol_reverse_start, standard_alpha, t);
            } else if constexpr (std::is_same_v<K, schedule::SmolHuman>) {
                const std::size_t peak = config.human_peak_phase();
                if (phase < peak)
                    return detail::lerp(smol_human_start, smol_human_peak,
                                        static_cast<double>(phase) / static_cast<double>(peak));
                return detail::lerp(smol_human_peak, standard_alpha,
                                    static_cast<double>(phase - peak) / static_cast<double>(ramp - peak));
            } else if constexpr (std::is_same_v<K, schedule::RandomUniform>) {
                if (k.lo == k.hi)
                    return k.lo;
                // uniform_real_distribution samples [lo, hi); the closed range
                // in the contract differs only on a measure-zero endpoint.
                return std::uniform_real_distribution<double>(k.lo, k.hi)(rng);
            } else {
                return k.alpha;
            }
        },
        config.kind);
}

/// Alpha for every phase of a run, in phase order.
inline std::vector<double> alpha_sequence(const ScheduleConfig& config, Rng& rng)
{
    std::vector<double> out(config.total_phases);
    for (std::size_t p = 0; p < config.total_phases; ++p)
        out[p] = alpha_at(config, p, rng);
    return out;
}

/// Empties each occupied cell independently with probability `sigma`.
/// Cells are visited in ascending order; returns how many were removed.
inline std::size_t apply_extinction(Archive& archive, double sigma, Rng& rng)
{
    if (!(sigma >= 0.0 && sigma <= 1.0))
        throw std::invalid_argument("apply_extinction: sigma must lie in [0,1]");
    if (sigma == 0.0)
        return 0;
    std::bernoulli_distribution dies(sigma);
    std::size_t removed = 0;
    for (std::size_t c : archive.occupied_cells()) {
        if (dies(rng)) {
            archive.clear_cell(c);
            ++removed;
        }
    }
    return removed;
}

} // namespace smol
