#pragma once

/// @file crawler.hpp
/// @brief Planar mass-link crawler with alpha-scaled linear actuators.
///
/// Point masses are joined by spring-damper links. Each chain link (i, i+1)
/// carries an ideal force actuator of strength alpha * gear * a_i acting along
/// the link axis, where a_i in (-1,1) comes from a tanh MLP. Ground contact is
/// a penalty spring-damper on y < 0 with Coulomb friction. Integration is
/// semi-implicit Euler: v += F/m dt, then p += v dt.
///
/// Fitness is the mean forward speed of the centre of mass; the descriptor is
/// the duty factor of the first and last mass. A chain lying on flat ground
/// never lifts off, so a mass counts as in contact for a step only when it is
/// planted: penetrating the ground and held by static friction. A slipping
/// mass is in its swing phase.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <smol/task.hpp>
#include <smol/types.hpp>

namespace smol::tasks {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct CrawlerParams {
    std::size_t n_masses = 4;
    double mass = 1.0;
    double rest_length = 0.5;
    double spring_k = 200.0;
    double spring_c = 2.0;
    double gear = 30.0;
    double gravity = 9.81;
    double ground_k = 5000.0;
    double ground_c = 50.0;
    double friction = 0.8;
    double dt = 0.01;
    std::size_t episode_steps = 500;
    std::vector<std::size_t> hidden = {16, 16};

    void validate() const
    {
        if (n_masses < 2)
            throw std::invalid_argument("crawler: masses must be at least 2");
        const std::pair<const char*, double> positives[]
            = {{"mass", mass}, {"rest_length", rest_length}, {"spring_k", spring_k},
               {"gear", gear}, {"dt", dt},                   {"ground_k", ground_k}};
        for (const auto& [name, v] : positives)
            if (!(std::isfinite(v) && v > 0.0))
                throw std::invalid_argument(std::string("crawler: ") + name + " must be positive");
        const std::pair<const char*, double> non_negative[]
            = {{"spring_c", spring_c}, {"gravity", gravity}, {"ground_c", ground_c}, {"friction", friction}};
        for (const auto& [name, v] : non_negative)
            if (!(std::isfinite(v) && v >= 0.0))
                throw std::invalid_argument(std::string("crawler: ") + name + " must be non-negative");
        if (episode_steps == 0)
            throw std::invalid_argument("crawler: episode_steps must be positive");
        if (!(dt * std::sqrt(ground_k / mass) < 2.0))
            throw std::invalid_argument("crawler: dt * sqrt(ground_k / mass) must be below 2 for a stable integrator");
        for (std::size_t h : hidden)
            if (h == 0)
                throw std::invalid_argument("crawler: hidden layer sizes must be positive");
    }
};

struct SimState {
    std::vector<Vec2> pos;
    std::vector<Vec2> vel;
    /// Planted flags of the step that produced this state.
    std::vector<std::uint8_t> contact;
    std::size_t step = 0;
};

struct Link {
    std::size_t a = 0;
    std::size_t b = 0;
    double rest = 0.0;
    /// Index into the action vector, or -1 for a passive link.
    std::ptrdiff_t actuator = -1;
};

/// Per-mass force contributions of one step, split by source.
struct ForceBreakdown {
    std::vector<Vec2> gravity, passive, actuator, contact;
};

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense tanh network. The genome stores, layer by layer, the weight matrix
/// (row-major, out x in) followed by the bias vector.
class MlpController {
public:
    explicit MlpController(std::vector<std::size_t> layer_sizes) : _sizes(std::move(layer_sizes))
    {
        if (_sizes.size() < 2)
            throw std::invalid_argument("mlp: need at least an input and an output layer");
        for (std::size_t s : _sizes)
            if (s == 0)
                throw std::invalid_argument("mlp: layer sizes must be positive");
        _a.resize(*std::max_element(_sizes.begin(), _sizes.end()));
        _b.resize(_a.size());
    }

    const std::vector<std::size_t>& layer_sizes() const { return _sizes; }
    std::size_t input_size() const { return _sizes.front(); }
    std::size_t output_size() const { return _sizes.back(); }

    std::size_t parameter_count() const
    {
        std::size_t n = 0;
        for (std::size_t l = 1; l < _sizes.size(); ++l)
            n += _sizes[l] * (_sizes[l - 1] + 1);
        return n;
    }

    /// Writes output_size() actions in (-1,1) into `action`.
    void forward(std::span<const double> genome, std::span<const double> observation, std::span<double> action)
    {
        if (genome.size() != parameter_count())
            throw std::invalid_argument("mlp: genome has " + std::to_string(genome.size()) + " parameters, expected "
                                        + std::to_string(parameter_count()));
        if (observation.size() != input_size())
            throw std::invalid_argument("mlp: observation has " + std::to_string(observation.size())
                                        + " entries, expected " + std::to_string(input_size()));
        if (action.size() != output_size())
            throw std::invalid_argument("mlp: action buffer size mismatch");

        std::copy(observation.begin(), observation.end(), _a.begin());
        const double* w = genome.data();
        for (std::size_t l = 1; l < _sizes.size(); ++l) {
            const std::size_t in = _sizes[l - 1], out = _sizes[l];
            const double* bias = w + in * out;
            for (std::size_t o = 0; o < out; ++o) {
                double s = bias[o];
                const double* row = w + o * in;
                for (std::size_t i = 0; i < in; ++i)
                    s += row[i] * _a[i];
                _b[o] = std::tanh(s);
            }
            w = bias + out;
            std::swap(_a, _b);
        }
        std::copy(_a.begin(), _a.begin() + static_cast<std::ptrdiff_t>(output_size()), action.begin());
    }

    std::vector<double> forward(std::span<const double> genome, std::span<const double> observation)
    {
        std::vector<double> action(output_size());
        forward(genome, observation, action);
        return action;
    }

private:
    std::vector<std::size_t> _sizes;
    std::vector<double> _a, _b;
};

inline std::vector<double> mlp_forward(std::span<const double> genome, std::span<const std::size_t> layer_sizes,
                                       std::span<const double> observation)
{
    MlpController mlp({layer_sizes.begin(), layer_sizes.end()});
    return mlp.forward(genome, observation);
}

/// The body geometry and dynamics for one parameter set.
class Crawler {
public:
    explicit Crawler(CrawlerParams params) : _params(std::move(params))
    {
        _params.validate();
        const std::size_t n = _params.n_masses;
        // Horizontal chain resting at the penalty-contact equilibrium depth.
        const double sink = _params.mass * _params.gravity / _params.ground_k;
        _initial = SimState{std::vector<Vec2>(n), std::vector<Vec2>(n), std::vector<std::uint8_t>(n, 1), 0};
        for (std::size_t i = 0; i < n; ++i)
            _initial.pos[i] = {static_cast<double>(i) * _params.rest_length, -sink};
        for (std::size_t i = 0; i + 1 < n; ++i)
            _links.push_back({i, i + 1, _params.rest_length, static_cast<std::ptrdiff_t>(i)});

        std::vector<std::size_t> sizes{observation_size()};
        sizes.insert(sizes.end(), _params.hidden.begin(), _params.hidden.end());
        sizes.push_back(actuator_count());
        _layer_sizes = std::move(sizes);
    }

    const CrawlerParams& params() const { return _params; }
    const std::vector<Link>& links() const { return _links; }
    std::size_t actuator_count() const { return _params.n_masses - 1; }
    std::size_t observation_size() const { return 5 * _params.n_masses; }
    const std::vector<std::size_t>& layer_sizes() const { return _layer_sizes; }
    std::size_t genome_length() const { return MlpController(_layer_sizes).parameter_count(); }

    const SimState& initial_state() const { return _initial; }

    /// Total force on each mass. When `parts` is given it receives the
    /// per-source contributions as well.
    std::vector<Vec2> forces(const SimState& s, std::span<const double> actions, double alpha,
                             ForceBreakdown* parts = nullptr, std::vector<std::uint8_t>* planted = nullptr) const
    {
        if (planted)
            planted->assign(s.pos.size(), 0);
        const std::size_t n = _params.n_masses;
        std::vector<Vec2> f(n);
        if (parts)
            *parts = ForceBreakdown{std::vector<Vec2>(n), std::vector<Vec2>(n), std::vector<Vec2>(n),
                                    std::vector<Vec2>(n)};

        for (std::size_t i = 0; i < n; ++i) {
            f[i].y -= _params.mass * _params.gravity;
            if (parts)
                parts->gravity[i].y = -_params.mass * _params.gravity;
        }

        for (const Link& l : _links) {
            const double dx = s.pos[l.b].x - s.pos[l.a].x;
            const double dy = s.pos[l.b].y - s.pos[l.a].y;
            const double len = std::sqrt(dx * dx + dy * dy);
            if (!(len > 0.0))
                throw SimulationError("crawler: link " + std::to_string(l.a) + "-" + std::to_string(l.b)
                                      + " collapsed to zero length at step " + std::to_string(s.step));
            const double ux = dx / len, uy = dy / len;
            const double rel_v = (s.vel[l.b].x - s.vel[l.a].x) * ux + (s.vel[l.b].y - s.vel[l.a].y) * uy;
            // Positive tension pulls the endpoints together.
            const double tension = _params.spring_k * (len - l.rest) + _params.spring_c * rel_v;
            f[l.a].x += tension * ux;
            f[l.a].y += tension * uy;
            f[l.b].x -= tension * ux;
            f[l.b].y -= tension * uy;
            if (parts) {
                parts->passive[l.a].x += tension * ux;
                parts->passive[l.a].y += tension * uy;
                parts->passive[l.b].x -= tension * ux;
                parts->passive[l.b].y -= tension * uy;
            }
            if (l.actuator >= 0) {
                // Positive action pushes the endpoints apart.
                const double push = alpha * _params.gear * actions[static_cast<std::size_t>(l.actuator)];
                f[l.a].x -= push * ux;
                f[l.a].y -= push * uy;
                f[l.b].x += push * ux;
                f[l.b].y += push * uy;
                if (parts) {
                    parts->actuator[l.a].x -= push * ux;
                    parts->actuator[l.a].y -= push * uy;
                    parts->actuator[l.b].x += push * ux;
                    parts->actuator[l.b].y += push * uy;
                }
            }
        }

        for (std::size_t i = 0; i < n; ++i) {
            if (!(s.pos[i].y < 0.0))
                continue;
            const double normal = std::max(0.0, -_params.ground_k * s.pos[i].y - _params.ground_c * s.vel[i].y);
            // Friction cancels the horizontal force that would make the mass
            // slip this step, capped at mu * N.
            const double cap = _params.friction * normal;
            const double want = f[i].x + _params.mass * s.vel[i].x / _params.dt;
            const double friction = -std::clamp(want, -cap, cap);
            f[i].y += normal;
            f[i].x += friction;
            if (planted)
                (*planted)[i] = std::abs(want) <= cap;
            if (parts) {
                parts->contact[i].y += normal;
                parts->contact[i].x += friction;
            }
        }
        return f;
    }

    /// One semi-implicit Euler step. Actions must lie in [-1,1].
    SimState step(const SimState& s, std::span<const double> actions, double alpha) const
    {
        if (actions.size() != actuator_count())
            throw std::invalid_argument("crawler: expected " + std::to_string(actuator_count()) + " actions");
        if (!(alpha > 0.0))
            throw std::invalid_argument("crawler: alpha must be positive");
        for (double a : actions)
            if (!(std::abs(a) <= 1.0))
                throw std::invalid_argument("crawler: actions must lie in [-1,1]");

        std::vector<std::uint8_t> planted;
        const std::vector<Vec2> f = forces(s, actions, alpha, nullptr, &planted);
        SimState next = s;
        next.contact = std::move(planted);
        const double inv_m = 1.0 / _params.mass;
        for (std::size_t i = 0; i < next.pos.size(); ++i) {
            next.vel[i].x += f[i].x * inv_m * _params.dt;
            next.vel[i].y += f[i].y * inv_m * _params.dt;
            next.pos[i].x += next.vel[i].x * _params.dt;
            next.pos[i].y += next.vel[i].y * _params.dt;
            if (!(std::isfinite(next.pos[i].x) && std::isfinite(next.pos[i].y) && std::isfinite(next.vel[i].x)
                  && std::isfinite(next.vel[i].y)))
                throw SimulationError("crawler: non-finite state for mass " + std::to_string(i) + " at step "
                                      + std::to_string(s.step + 1));
        }
        ++next.step;
        return next;
    }

    /// Kinetic + gravitational + link spring + ground penalty spring energy
    /// of an unactuated body.
    ///
    /// The stored velocity lags the positions by half a step. Kinetic energy
    /// is taken as m/2 * v(t - dt/2) . v(t + dt/2), the pairing under which
    /// semi-implicit Euler conserves energy exactly for linear forces.
    double mechanical_energy(const SimState& s) const
    {
        const std::vector<double> idle(actuator_count(), 0.0);
        const std::vector<Vec2> f = forces(s, idle, 1.0);
        double e = 0.0;
        for (std::size_t i = 0; i < s.pos.size(); ++i) {
            const double vx_next = s.vel[i].x + f[i].x / _params.mass * _params.dt;
            const double vy_next = s.vel[i].y + f[i].y / _params.mass * _params.dt;
            e += 0.5 * _params.mass * (s.vel[i].x * vx_next + s.vel[i].y * vy_next);
            e += _params.mass * _params.gravity * s.pos[i].y;
            if (s.pos[i].y < 0.0)
                e += 0.5 * _params.ground_k * s.pos[i].y * s.pos[i].y;
        }
        for (const Link& l : _links) {
            const double dx = s.pos[l.b].x - s.pos[l.a].x;
            const double dy = s.pos[l.b].y - s.pos[l.a].y;
            const double stretch = std::sqrt(dx * dx + dy * dy) - l.rest;
            e += 0.5 * _params.spring_k * stretch * stretch;
        }
        return e;
    }

    /// Centre-of-mass-relative positions, velocities and contact flag per mass.
    void observe(const SimState& s, std::span<double> obs) const
    {
        const Vec2 c = center_of_mass(s);
        for (std::size_t i = 0; i < s.pos.size(); ++i) {
            obs[5 * i + 0] = s.pos[i].x - c.x;
            obs[5 * i + 1] = s.pos[i].y - c.y;
            obs[5 * i + 2] = s.vel[i].x;
            obs[5 * i + 3] = s.vel[i].y;
            obs[5 * i + 4] = s.contact[i] ? 1.0 : 0.0;
        }
    }

    static Vec2 center_of_mass(const SimState& s)
    {
        Vec2 c;
        for (const Vec2& p : s.pos) {
            c.x += p.x;
            c.y += p.y;
        }
        const double n = static_cast<double>(s.pos.size());
        return {c.x / n, c.y / n};
    }

private:
    CrawlerParams _params;
    SimState _initial;
    std::vector<Link> _links;
    std::vector<std::size_t> _layer_sizes;
};

/// Free-function form of Crawler::step.
inline SimState sim_step(const SimState& state, std::span<const double> actions, double alpha,
                         const CrawlerParams& params)
{
    return Crawler(params).step(state, actions, alpha);
}

/// Called after every episode step with the post-step state and the actions that produced it.
using StepObserver = std::function<void(const SimState&, std::span<const double> actions)>;

/// Runs one episode from `start`. An aborted simulation yields fitness
/// -infinity and a descriptor of zeros; callers treat it as a discard.
inline Evaluation rollout_from(const Crawler& crawler, const SimState& start, std::span<const double> genome,
                               double alpha, const StepObserver& observer = {})
{
    const CrawlerParams& p = crawler.params();
    if (genome.size() != crawler.genome_length())
        throw std::invalid_argument("crawler: genome length " + std::to_string(genome.size()) + ", expected "
                                    + std::to_string(crawler.genome_length()));
    if (!(alpha > 0.0))
        throw std::invalid_argument("crawler: alpha must be positive");

    MlpController mlp(crawler.layer_sizes());
    std::vector<double> obs(crawler.observation_size());
    std::vector<double> action(crawler.actuator_count());
    try {
        SimState s = start;
        const double x0 = Crawler::center_of_mass(s).x;
        std::size_t first_down = 0, last_down = 0;
        for (std::size_t t = 0; t < p.episode_steps; ++t) {
            crawler.observe(s, obs);
            mlp.forward(genome, obs, action);
            s = crawler.step(s, action, alpha);
            first_down += s.contact.front();
            last_down += s.contact.back();
            if (observer)
                observer(s, action);
        }
        const double steps = static_cast<double>(p.episode_steps);
        const double fitness = (Crawler::center_of_mass(s).x - x0) / (steps * p.dt);
        return {fitness, {static_cast<double>(first_down) / steps, static_cast<double>(last_down) / steps}};
    } catch (const SimulationError&) {
        return {-std::numeric_limits<double>::infinity(), {0.0, 0.0}};
    }
}

/// Runs one episode from the resting horizontal chain.
inline Evaluation rollout(const Crawler& crawler, std::span<const double> genome, double alpha,
                          const StepObserver& observer = {})
{
    return rollout_from(crawler, crawler.initial_state(), genome, alpha, observer);
}

inline Evaluation rollout(std::span<const double> genome, double alpha, const CrawlerParams& params)
{
    return rollout(Crawler(params), genome, alpha);
}

/// Writes "step,x0,y0,c0,x1,y1,c1,..." rows for one episode.
inline Evaluation write_trajectory(std::ostream& os, const Crawler& crawler, std::span<const double> genome,
                                   double alpha)
{
    const std::size_t n = crawler.params().n_masses;
    os << "step";
    for (std::size_t i = 0; i < n; ++i)
        os << ",x" << i << ",y" << i << ",contact" << i;
    os << '\n';
    auto row = [&](const SimState& s) {
        os << s.step;
        for (std::size_t i = 0; i < n; ++i)
            os << ',' << s.pos[i].x << ',' << s.pos[i].y << ',' << int(s.contact[i]);
        os << '\n';
    };
    row(crawler.initial_state());
    return rollout(crawler, genome, alpha, [&](const SimState& s, std::span<const double>) { row(s); });
}

inline Task make_crawler_task(const CrawlerParams& params)
{
    auto crawler = std::make_shared<const Crawler>(params);
    return Task{"crawler", crawler->genome_length(), 2, true,
                [crawler](std::span<const double> g, double alpha) { return rollout(*crawler, g, alpha); }};
}

} // namespace smol::tasks
