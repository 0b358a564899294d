#pragma once

/// @file runner.hpp
/// @brief MAP-Elites with a phase-wise alpha schedule.
///
/// The run is divided into phases of `generations_per_phase` generations. At
/// the start of every phase after the first, alpha is set from the schedule,
/// extinction (if configured) thins the archive, and the surviving elites are
/// reevaluated under the new alpha and transferred into a fresh archive.
/// Each generation selects parent pairs uniformly, applies iso+line, evaluates
/// the batch in parallel and inserts results in batch order.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <smol/archive.hpp>
#include <smol/cvt.hpp>
#include <smol/parallel.hpp>
#include <smol/random.hpp>
#include <smol/schedules.hpp>
#include <smol/task.hpp>
#include <smol/tasks/crawler.hpp>
#include <smol/tasks/scaled_arm.hpp>
#include <smol/variation.hpp>

namespace smol {

struct RunConfig {
    std::string task = "scaled_arm";
    tasks::ScaledArmParams arm;
    tasks::CrawlerParams crawler;
    ScheduleConfig schedule;
    std::size_t k = 1024;
    std::size_t batch_size = 256;
    std::size_t generations_per_phase = 20;
    double init_sigma = 0.1;
    VariationParams variation;
    std::uint64_t seed = 0;
    /// Centroids depend on this seed only, so every run with the same k and
    /// task shares one tessellation.
    std::uint64_t cvt_seed = 42;
    /// 0 selects default_cvt_samples(k).
    std::size_t cvt_samples = 0;
    std::size_t workers = 1;
    std::string output_dir;
    /// Crawler only: also write trajectory.csv for the best final elite.
    bool trace_best = false;

    void validate() const
    {
        if (task != "scaled_arm" && task != "crawler")
            throw std::invalid_argument("task: unknown task '" + task + "' (expected scaled_arm or crawler)");
        if (task == "scaled_arm")
            arm.validate();
        else
            crawler.validate();
        schedule.validate();
        variation.validate();
        if (k == 0)
            throw std::invalid_argument("k: must be positive");
        if (batch_size == 0)
            throw std::invalid_argument("batch_size: must be at least 1");
        if (generations_per_phase == 0)
            throw std::invalid_argument("generations_per_phase: must be at least 1");
        if (!(std::isfinite(init_sigma) && init_sigma >= 0.0))
            throw std::invalid_argument("init_sigma: must be finite and non-negative");
        if (cvt_samples != 0 && cvt_samples < k)
            throw std::invalid_argument("cvt_samples: must be 0 (automatic) or at least the number of cells");
        if (workers == 0)
            throw std::invalid_argument("workers: must be at least 1");
    }

    std::size_t resolved_cvt_samples() const { return cvt_samples == 0 ? default_cvt_samples(k) : cvt_samples; }
};

inline Task make_task(const RunConfig& config)
{
    if (config.task == "scaled_arm")
        return tasks::make_scaled_arm_task(config.arm);
    if (config.task == "crawler")
        return tasks::make_crawler_task(config.crawler);
    throw std::invalid_argument("task: unknown task '" + config.task + "'");
}

struct MetricsRecord {
    std::size_t generation = 0;
    std::size_t phase = 0;
    double alpha = 1.0;
    double coverage = 0.0;
    std::optional<double> max_fitness;
    /// Candidates generated and evaluated, initial batch included.
    std::size_t evaluations = 0;
    /// Elite reevaluations at phase boundaries, counted apart from the budget.
    std::size_t reevaluations = 0;
    /// Cumulative failed evaluations (candidates and reevaluations).
    std::size_t discards = 0;

    friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

using MetricsLog = std::vector<MetricsRecord>;

struct RunResult {
    Archive archive;
    MetricsLog log;
    std::vector<double> alphas;
};

namespace detail {
inline std::vector<Genome> random_genomes(std::size_t count, std::size_t length, double sigma, Rng& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Genome> out(count, Genome(length));
    for (auto& g : out)
        for (auto& v : g)
            v = sigma * normal(rng);
    return out;
}
} // namespace detail

/// Runs the full schedule. `on_record`, when set, sees every metrics record as
/// it is produced.
inline RunResult run_experiment(const RunConfig& config,
                                const std::function<void(const MetricsRecord&)>& on_record = {})
{
    config.validate();
    const Task task = make_task(config);
    auto centroids = std::make_shared<const Centroids>(
        compute_cvt_centroids(config.k, task.descriptor_dim, config.resolved_cvt_samples(), config.cvt_seed));

    Rng init_rng = make_rng(config.seed, Stream::Init);
    Rng variation_rng = make_rng(config.seed, Stream::Variation);
    Rng schedule_rng = make_rng(config.seed, Stream::Schedule);
    Rng extinction_rng = make_rng(config.seed, Stream::Extinction);

    RunResult result{Archive(centroids), {}, alpha_sequence(config.schedule, schedule_rng)};
    Archive& archive = result.archive;
    MetricsRecord rec;

    auto insert_batch = [&](const std::vector<Genome>& genomes, double alpha) {
        for (auto& s : evaluate_batch(genomes, task, alpha, config.workers)) {
            if (s)
                archive.try_insert(std::move(*s));
            else
                ++rec.discards;
        }
        rec.evaluations += genomes.size();
    };
    auto log = [&] {
        const ArchiveMetrics m = archive_metrics(archive);
        rec.coverage = m.coverage;
        rec.max_fitness = m.max_fitness;
        result.log.push_back(rec);
        if (on_record)
            on_record(rec);
    };

    rec.alpha = result.alphas[0];
    insert_batch(detail::random_genomes(config.batch_size, task.genome_len, config.init_sigma, init_rng), rec.alpha);
    log();

    for (std::size_t phase = 0; phase < config.schedule.total_phases; ++phase) {
        rec.phase = phase;
        rec.alpha = result.alphas[phase];
        if (phase > 0) {
            if (config.schedule.extinction_sigma > 0.0)
                apply_extinction(archive, config.schedule.extinction_sigma, extinction_rng);
            TransferResult moved = reevaluate_and_transfer(archive, task, rec.alpha, config.workers);
            archive = std::move(moved.archive);
            rec.reevaluations += moved.reevaluated;
            rec.discards += moved.discarded;
        }
        for (std::size_t g = 0; g < config.generations_per_phase; ++g) {
            ++rec.generation;
            std::vector<Genome> children;
            if (archive.empty()) {
                // Everything went extinct or failed: restart from random genomes.
                children = detail::random_genomes(config.batch_size, task.genome_len, config.init_sigma, init_rng);
            } else {
                children.reserve(config.batch_size);
                for (const auto& [a, b] : select_parents(archive, config.batch_size, variation_rng))
                    children.push_back(iso_line(a->genome, b->genome, config.variation, variation_rng));
            }
            insert_batch(children, rec.alpha);
            log();
        }
    }
    return result;
}

/// metrics.csv: one row per record, reals printed with 17 significant digits,
/// an absent max_fitness left empty.
inline void write_metrics_csv(std::ostream& os, const MetricsLog& log)
{
    os << "generation,phase,alpha,coverage,max_fitness,evaluations,reevaluations,discards\n";
    for (const auto& r : log) {
        os << r.generation << ',' << r.phase << ',';
        detail::write_real(os, r.alpha);
        os << ',';
        detail::write_real(os, r.coverage);
        os << ',';
        if (r.max_fitness)
            detail::write_real(os, *r.max_fitness);
        os << ',' << r.evaluations << ',' << r.reevaluations << ',' << r.discards << '\n';
    }
}

} // namespace smol
