#pragma once

/// @file cvt.hpp
/// @brief Centroidal Voronoi tessellation of the unit hypercube and nearest-centroid lookup.
///
/// Centroids are produced by Lloyd's k-means over uniform samples of [0,1]^d.
/// Cell assignment uses an exact kd-tree; its answers are identical to an
/// exhaustive minimum-distance scan, including the lowest-index tie rule.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <smol/random.hpp>
#include <smol/types.hpp>

namespace smol {

namespace detail {

// Summation order is fixed (dimension 0 first) so that every caller computing
// a distance gets the same bits.
inline double squared_distance(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        s += diff * diff;
    }
    return s;
}

/// Static kd-tree over a flat point array. Nodes are stored implicitly: the
/// node for range [lo, hi) is the median element mid, its children cover
/// [lo, mid) and [mid+1, hi).
class KdTree {
public:
    KdTree() = default;

    KdTree(std::span<const double> coords, std::size_t dim) : _coords(coords.begin(), coords.end()), _dim(dim)
    {
        const std::size_t n = dim == 0 ? 0 : coords.size() / dim;
        _order.resize(n);
        std::iota(_order.begin(), _order.end(), std::size_t{0});
        _axis.assign(n, 0);
        _build(0, n, 0);
    }

    /// Index of the nearest point; ties go to the lowest index.
    std::size_t nearest(std::span<const double> query) const
    {
        std::size_t best = static_cast<std::size_t>(-1);
        double best_d = std::numeric_limits<double>::infinity();
        _search(query, 0, _order.size(), best, best_d);
        return best;
    }

private:
    std::span<const double> _point(std::size_t idx) const { return {_coords.data() + idx * _dim, _dim}; }

    void _build(std::size_t lo, std::size_t hi, std::size_t depth)
    {
        if (hi <= lo)
            return;
        const std::size_t axis = depth % _dim;
        const std::size_t mid = lo + (hi - lo) / 2;
        std::nth_element(_order.begin() + lo, _order.begin() + mid, _order.begin() + hi,
                         [&](std::size_t a, std::size_t b) {
                             const double ca = _coords[a * _dim + axis];
                             const double cb = _coords[b * _dim + axis];
                             return ca < cb || (ca == cb && a < b);
                         });
        _axis[mid] = axis;
        _build(lo, mid, depth + 1);
        _build(mid + 1, hi, depth + 1);
    }

    void _search(std::span<const double> q, std::size_t lo, std::size_t hi, std::size_t& best, double& best_d) const
    {
        if (hi <= lo)
            return;
        const std::size_t mid = lo + (hi - lo) / 2;
        const std::size_t idx = _order[mid];
        const std::size_t axis = _axis[mid];

        const double d = squared_distance(q, _point(idx));
        if (d < best_d || (d == best_d && idx < best)) {
            best_d = d;
            best = idx;
        }

        const double split = _coords[idx * _dim + axis];
        const double diff = q[axis] - split;
        const bool left_first = diff <= 0.0;
        if (left_first)
            _search(q, lo, mid, best, best_d);
        else
            _search(q, mid + 1, hi, best, best_d);

        // Points on the far side are at least |diff| away along this axis.
        // Equal bounds must still be visited: they may hold a lower-index tie.
        if (diff * diff <= best_d) {
            if (left_first)
                _search(q, mid + 1, hi, best, best_d);
            else
                _search(q, lo, mid, best, best_d);
        }
    }

    std::vector<double> _coords;
    std::size_t _dim = 0;
    std::vector<std::size_t> _order;
    std::vector<std::size_t> _axis;
};

} // namespace detail

/// k points in [0,1]^d defining the archive cells.
class Centroids {
public:
    Centroids(std::vector<double> coords, std::size_t dim) : _coords(std::move(coords)), _dim(dim)
    {
        if (dim == 0)
            throw std::invalid_argument("centroids: dimension must be positive");
        if (_coords.empty() || _coords.size() % dim != 0)
            throw std::invalid_argument("centroids: coordinate count must be a positive multiple of the dimension");
        _tree = detail::KdTree(_coords, _dim);
    }

    std::size_t size() const { return _coords.size() / _dim; }
    std::size_t dim() const { return _dim; }
    std::span<const double> point(std::size_t i) const { return {_coords.data() + i * _dim, _dim}; }
    const std::vector<double>& coords() const { return _coords; }

    /// Nearest centroid by Euclidean distance; exact ties go to the lowest index.
    std::size_t nearest(std::span<const double> descriptor) const
    {
        if (descriptor.size() != _dim)
            throw std::invalid_argument("assign_cell: descriptor dimension " + std::to_string(descriptor.size())
                                        + " does not match centroid dimension " + std::to_string(_dim));
        return _tree.nearest(descriptor);
    }

private:
    std::vector<double> _coords;
    std::size_t _dim;
    detail::KdTree _tree;
};

inline std::size_t assign_cell(std::span<const double> descriptor, const Centroids& centroids)
{
    return centroids.nearest(descriptor);
}

struct CvtOptions {
    std::size_t max_iterations = 200;
    double tolerance = 1e-4;
};

/// Sample count used when none is configured: 50 per cell, at least 100000.
inline std::size_t default_cvt_samples(std::size_t k) { return std::max<std::size_t>(50 * k, 100000); }

/// The uniform sample cloud Lloyd's iteration runs on. Row-major, n_samples x d.
inline std::vector<double> uniform_samples(std::size_t n_samples, std::size_t d, std::uint64_t seed)
{
    Rng rng = make_rng(seed, Stream::Centroids);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> samples(n_samples * d);
    for (auto& s : samples)
        s = unif(rng);
    return samples;
}

/// Lloyd's k-means on uniform samples, initialised from the first k samples.
/// A centroid whose cluster goes empty stays where it is.
inline Centroids compute_cvt_centroids(std::size_t k, std::size_t d, std::size_t n_samples, std::uint64_t seed,
                                       const CvtOptions& options = {})
{
    if (k == 0)
        throw std::invalid_argument("compute_cvt_centroids: k must be positive");
    if (d == 0)
        throw std::invalid_argument("compute_cvt_centroids: dimension must be positive");
    if (n_samples < k)
        throw std::invalid_argument("compute_cvt_centroids: need at least k samples (got " + std::to_string(n_samples)
                                    + " for k=" + std::to_string(k) + ")");

    const std::vector<double> samples = uniform_samples(n_samples, d, seed);
    std::vector<double> centers(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(k * d));

    std::vector<double> sums(k * d);
    std::vector<std::size_t> counts(k);
    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
        const detail::KdTree tree(centers, d);
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), std::size_t{0});
        for (std::size_t s = 0; s < n_samples; ++s) {
            const std::span<const double> x(samples.data() + s * d, d);
            const std::size_t c = tree.nearest(x);
            ++counts[c];
            for (std::size_t j = 0; j < d; ++j)
                sums[c * d + j] += x[j];
        }

        double movement = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0)
                continue;
            for (std::size_t j = 0; j < d; ++j) {
                const double updated = sums[c * d + j] / static_cast<double>(counts[c]);
                movement = std::max(movement, std::abs(updated - centers[c * d + j]));
                centers[c * d + j] = updated;
            }
        }
        if (movement < options.tolerance)
            break;
    }
    return Centroids(std::move(centers), d);
}

} // namespace smol
