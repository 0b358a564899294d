#pragma once

/// @file archive.hpp
/// @brief CVT MAP-Elites archive: elitist insertion, parent selection,
/// reevaluation-and-transfer and the coverage / max-fitness metrics.

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <smol/cvt.hpp>
#include <smol/parallel.hpp>
#include <smol/random.hpp>
#include <smol/task.hpp>
#include <smol/types.hpp>

namespace smol {

enum class InsertOutcome { AddedToEmptyCell, ReplacedIncumbent, Rejected };

/// One elite per centroid cell. Centroids are shared between an archive and
/// every archive transferred from it.
class Archive {
public:
    explicit Archive(std::shared_ptr<const Centroids> centroids)
        : _centroids(std::move(centroids)), _cells(_centroids ? _centroids->size() : 0)
    {
        if (!_centroids)
            throw std::invalid_argument("archive: null centroids");
    }

    explicit Archive(Centroids centroids) : Archive(std::make_shared<const Centroids>(std::move(centroids))) {}

    /// Stores the candidate if its cell is empty or it is strictly fitter than
    /// the incumbent. Descriptors are clamped into [0,1]^d first. A candidate
    /// with non-finite fitness is always rejected.
    InsertOutcome try_insert(Solution candidate)
    {
        if (!std::isfinite(candidate.fitness))
            return InsertOutcome::Rejected;
        candidate.descriptor = clamp_descriptor(std::move(candidate.descriptor));
        const std::size_t cell = assign_cell(candidate.descriptor, *_centroids);
        auto& slot = _cells[cell];
        if (!slot) {
            slot = std::move(candidate);
            ++_occupied;
            return InsertOutcome::AddedToEmptyCell;
        }
        if (candidate.fitness > slot->fitness) {
            slot = std::move(candidate);
            return InsertOutcome::ReplacedIncumbent;
        }
        return InsertOutcome::Rejected;
    }

    void clear_cell(std::size_t cell)
    {
        if (_cells.at(cell)) {
            _cells[cell].reset();
            --_occupied;
        }
    }

    /// Same centroids, no elites.
    Archive empty_like() const { return Archive(_centroids); }

    const std::optional<Solution>& cell(std::size_t i) const { return _cells.at(i); }
    std::size_t capacity() const { return _cells.size(); }
    std::size_t size() const { return _occupied; }
    bool empty() const { return _occupied == 0; }
    const Centroids& centroids() const { return *_centroids; }
    const std::shared_ptr<const Centroids>& shared_centroids() const { return _centroids; }

    /// Occupied cell indices in ascending order.
    std::vector<std::size_t> occupied_cells() const
    {
        std::vector<std::size_t> out;
        out.reserve(_occupied);
        for (std::size_t i = 0; i < _cells.size(); ++i)
            if (_cells[i])
                out.push_back(i);
        return out;
    }

private:
    std::shared_ptr<const Centroids> _centroids;
    std::vector<std::optional<Solution>> _cells;
    std::size_t _occupied = 0;
};

struct ArchiveMetrics {
    double coverage = 0.0;
    std::optional<double> max_fitness;
};

inline ArchiveMetrics archive_metrics(const Archive& archive)
{
    ArchiveMetrics m;
    m.coverage = static_cast<double>(archive.size()) / static_cast<double>(archive.capacity());
    for (std::size_t i = 0; i < archive.capacity(); ++i) {
        const auto& c = archive.cell(i);
        if (c && (!m.max_fitness || c->fitness > *m.max_fitness))
            m.max_fitness = c->fitness;
    }
    return m;
}

/// Uniform parent pairs over occupied cells, drawn independently.
inline std::vector<std::pair<const Solution*, const Solution*>> select_parents(const Archive& archive,
                                                                               std::size_t n_pairs, Rng& rng)
{
    if (archive.empty())
        throw std::invalid_argument("select_parents: archive is empty");
    const auto occupied = archive.occupied_cells();
    std::uniform_int_distribution<std::size_t> pick(0, occupied.size() - 1);
    std::vector<std::pair<const Solution*, const Solution*>> pairs;
    pairs.reserve(n_pairs);
    for (std::size_t i = 0; i < n_pairs; ++i) {
        const Solution* a = &*archive.cell(occupied[pick(rng)]);
        const Solution* b = &*archive.cell(occupied[pick(rng)]);
        pairs.emplace_back(a, b);
    }
    return pairs;
}

struct TransferResult {
    Archive archive;
    std::size_t reevaluated = 0;
    std::size_t discarded = 0;
};

/// Re-scores every elite at `alpha_new` and offers it to a fresh archive with
/// the same centroids, visiting source cells in ascending index. Elites whose
/// reevaluation fails are dropped and counted in `discarded`.
inline TransferResult reevaluate_and_transfer(const Archive& archive, const Task& task, double alpha_new,
                                              std::size_t workers = 1)
{
    if (!(alpha_new > 0.0))
        throw std::invalid_argument("reevaluate_and_transfer: alpha must be positive");
    const auto occupied = archive.occupied_cells();
    std::vector<Genome> genomes;
    genomes.reserve(occupied.size());
    for (std::size_t c : occupied)
        genomes.push_back(archive.cell(c)->genome);

    TransferResult out{archive.empty_like(), genomes.size(), 0};
    for (auto& result : evaluate_batch(genomes, task, alpha_new, workers)) {
        if (result)
            out.archive.try_insert(std::move(*result));
        else
            ++out.discarded;
    }
    return out;
}

namespace detail {
inline void write_real(std::ostream& os, double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
}
} // namespace detail

/// Header plus one row per occupied cell:
/// cell_index, fitness, d0..d{D-1}, g0..g{N-1}. Reals round-trip exactly.
inline void write_archive_csv(std::ostream& os, const Archive& archive)
{
    const std::size_t d = archive.centroids().dim();
    std::size_t n = 0;
    for (std::size_t c : archive.occupied_cells()) {
        n = archive.cell(c)->genome.size();
        break;
    }
    os << "cell_index,fitness";
    for (std::size_t j = 0; j < d; ++j)
        os << ",d" << j;
    for (std::size_t j = 0; j < n; ++j)
        os << ",g" << j;
    os << '\n';
    for (std::size_t c : archive.occupied_cells()) {
        const Solution& s = *archive.cell(c);
        os << c << ',';
        detail::write_real(os, s.fitness);
        for (double v : s.descriptor) {
            os << ',';
            detail::write_real(os, v);
        }
        for (double v : s.genome) {
            os << ',';
            detail::write_real(os, v);
        }
        os << '\n';
    }
}

/// Header plus one row per centroid: cell_index, c0..c{D-1}.
inline void write_centroids_csv(std::ostream& os, const Centroids& centroids)
{
    os << "cell_index";
    for (std::size_t j = 0; j < centroids.dim(); ++j)
        os << ",c" << j;
    os << '\n';
    for (std::size_t i = 0; i < centroids.size(); ++i) {
        os << i;
        for (double v : centroids.point(i)) {
            os << ',';
            detail::write_real(os, v);
        }
        os << '\n';
    }
}

} // namespace smol
