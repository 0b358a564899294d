#pragma once

/// @file cli.hpp
/// @brief The run / compare / sweep / export-centroids commands.
///
/// Commands report problems on `err` and return a non-zero status instead of
/// throwing, so the executable in tools/ is a thin argument parser.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <smol/archive.hpp>
#include <smol/config.hpp>
#include <smol/runner.hpp>
#include <smol/stats.hpp>

namespace smol::cli {

namespace fs = std::filesystem;

/// Environment variable naming the default root for run output directories.
inline constexpr const char* output_root_env = "SMOL_OUTPUT_ROOT";

inline const std::vector<std::string>& run_files()
{
    static const std::vector<std::string> names{"metrics.csv", "archive.csv", "centroids.csv", "run_meta"};
    return names;
}

struct RunOptions {
    std::optional<std::string> config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    bool force = false;
    bool quiet = false;
};

/// Config file, then --set overrides, then --seed and --out.
inline KeyValues gather_assignments(const RunOptions& opt)
{
    KeyValues kv;
    if (opt.config_path)
        kv = read_config_file(*opt.config_path);
    for (const auto& o : opt.overrides)
        kv.push_back(parse_assignment(o));
    if (opt.seed)
        kv.emplace_back("seed", std::to_string(*opt.seed));
    if (opt.out_dir)
        kv.emplace_back("output_dir", *opt.out_dir);
    return kv;
}

inline std::string default_output_dir(const RunConfig& c)
{
    const char* root = std::getenv(output_root_env);
    const fs::path base = root && *root ? fs::path(root) : fs::path("runs");
    return (base / (std::string(schedule_name(c.schedule.kind)) + "_seed" + std::to_string(c.seed))).string();
}

inline bool has_run_outputs(const fs::path& dir)
{
    for (const auto& f : run_files())
        if (fs::exists(dir / f))
            return true;
    return false;
}

template <typename Fn>
void write_file(const fs::path& path, Fn&& body)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    body(os);
    if (!os)
        throw std::runtime_error("error while writing '" + path.string() + "'");
}

/// Writes metrics.csv, archive.csv, centroids.csv and run_meta into `dir`.
inline void write_run_outputs(const fs::path& dir, const RunConfig& config, const RunResult& result,
                              const std::vector<std::string>& overrides = {})
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
    write_file(dir / "metrics.csv", [&](std::ostream& os) { write_metrics_csv(os, result.log); });
    write_file(dir / "archive.csv", [&](std::ostream& os) { write_archive_csv(os, result.archive); });
    write_file(dir / "centroids.csv", [&](std::ostream& os) { write_centroids_csv(os, result.archive.centroids()); });
    write_file(dir / "run_meta", [&](std::ostream& os) {
        os << "# resolved configuration; usable as a config file\n";
        for (const auto& o : overrides)
            os << "# override: " << o << '\n';
        os << to_config_text(config);
    });

    if (config.trace_best && config.task == "crawler" && !result.archive.empty()) {
        std::size_t best = 0;
        double best_fit = -std::numeric_limits<double>::infinity();
        for (std::size_t c : result.archive.occupied_cells())
            if (result.archive.cell(c)->fitness > best_fit) {
                best_fit = result.archive.cell(c)->fitness;
                best = c;
            }
        const tasks::Crawler crawler(config.crawler);
        write_file(dir / "trajectory.csv", [&](std::ostream& os) {
            tasks::write_trajectory(os, crawler, result.archive.cell(best)->genome, result.alphas.back());
        });
    }
}

/// Resolves the configuration for a run without executing it.
inline RunConfig resolve_run_config(const RunOptions& opt)
{
    RunConfig config = resolve_config(gather_assignments(opt));
    if (config.output_dir.empty())
        config.output_dir = default_output_dir(config);
    return config;
}

inline int cmd_run(const RunOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    RunConfig config;
    try {
        config = resolve_run_config(opt);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    const fs::path dir(config.output_dir);
    if (has_run_outputs(dir) && !opt.force) {
        err << "error: '" << dir.string() << "' already holds run outputs (use --force to overwrite)\n";
        return 3;
    }
    try {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec)
            throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
        const std::size_t phase_len = config.generations_per_phase;
        const RunResult result = run_experiment(config, [&](const MetricsRecord& r) {
            if (!opt.quiet && r.generation > 0 && r.generation % (10 * phase_len) == 0)
                out << "gen " << r.generation << " phase " << r.phase << " alpha " << r.alpha << " coverage "
                    << r.coverage << '\n';
        });
        write_run_outputs(dir, config, result, opt.overrides);
        const auto m = archive_metrics(result.archive);
        out << "wrote " << dir.string() << " (coverage " << m.coverage;
        if (m.max_fitness)
            out << ", max_fitness " << *m.max_fitness;
        out << ")\n";
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

/// Reads metrics.csv and returns the named column of the last row.
inline double final_metric(const fs::path& run_dir, const std::string& metric)
{
    const fs::path file = run_dir / "metrics.csv";
    std::ifstream in(file);
    if (!in)
        throw std::runtime_error("missing metrics file '" + file.string() + "'");
    std::string header, line, last;
    std::getline(in, header);
    while (std::getline(in, line))
        if (!line.empty())
            last = line;
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string c;
        while (std::getline(ss, c, ','))
            cells.push_back(c);
        if (!s.empty() && s.back() == ',')
            cells.emplace_back();
        return cells;
    };
    const auto names = split(header);
    const auto values = split(last);
    std::size_t col = names.size();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == metric)
            col = i;
    bool valid_metric = false;
    for (const auto& n : stats::metric_names())
        valid_metric = valid_metric || n == metric;
    if (!valid_metric || col == names.size())
        throw std::invalid_argument("unknown metric '" + metric + "' (valid: " + stats::joined_metric_names() + ")");
    if (last.empty() || col >= values.size() || values[col].empty())
        throw std::runtime_error("no final '" + metric + "' value in '" + file.string() + "'");
    return config_detail::to_real(metric, values[col]);
}

struct CompareOptions {
    std::string metric = "coverage";
    std::vector<std::string> run_dirs;
    std::vector<std::string> labels;
    std::optional<std::string> out_path;
    bool lower_is_better = false;
};

inline int cmd_compare(const CompareOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    try {
        if (opt.labels.size() != opt.run_dirs.size())
            throw std::invalid_argument("got " + std::to_string(opt.labels.size()) + " labels for "
                                        + std::to_string(opt.run_dirs.size()) + " run directories");
        std::vector<std::pair<std::string, std::vector<double>>> groups;
        for (std::size_t i = 0; i < opt.run_dirs.size(); ++i) {
            const double v = final_metric(opt.run_dirs[i], opt.metric);
            auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == opt.labels[i]; });
            if (it == groups.end())
                groups.emplace_back(opt.labels[i], std::vector<double>{v});
            else
                it->second.push_back(v);
        }
        for (const auto& [label, values] : groups)
            if (values.size() < 2)
                throw std::invalid_argument("label '" + label + "' has " + std::to_string(values.size())
                                            + " run(s); at least 2 seeds per label are required");
        const auto table = stats::compare_final(groups, opt.lower_is_better ? stats::Direction::LowerIsBetter
                                                                            : stats::Direction::HigherIsBetter);
        std::ostringstream csv;
        stats::write_comparison_csv(csv, table);
        out << "final " << opt.metric << ": median and one-sided U-test p-values (column better than row)\n"
            << csv.str();
        if (opt.out_path)
            write_file(*opt.out_path, [&](std::ostream& os) { os << csv.str(); });
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

/// One sweep entry: a label plus the assignments it adds to the base config.
/// "smol" means label smol with schedule=smol; "ext10:schedule=constant,extinction_sigma=0.1"
/// gives label ext10 with those two assignments.
struct SweepVariant {
    std::string label;
    KeyValues assignments;
};

inline SweepVariant parse_sweep_variant(const std::string& text)
{
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        parse_schedule_name(text); // validates
        return {text, {{"schedule", text}}};
    }
    SweepVariant v{text.substr(0, colon), {}};
    if (v.label.empty())
        throw std::invalid_argument("empty label in sweep entry '" + text + "'");
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ','))
        v.assignments.push_back(parse_assignment(item));
    return v;
}

/// Flattens --schedules arguments: entries are separated by ';', and an entry
/// without ':' may list several plain schedule names separated by ','.
inline std::vector<std::string> split_schedule_list(const std::vector<std::string>& args)
{
    std::vector<std::string> out;
    auto split = [](const std::string& s, char sep) {
        std::vector<std::string> parts;
        std::stringstream ss(s);
        std::string p;
        while (std::getline(ss, p, sep))
            if (auto t = config_detail::trim(p); !t.empty())
                parts.push_back(t);
        return parts;
    };
    for (const auto& arg : args)
        for (const auto& entry : split(arg, ';')) {
            if (entry.find(':') != std::string::npos) {
                out.push_back(entry);
                continue;
            }
            for (const auto& name : split(entry, ','))
                out.push_back(name);
        }
    return out;
}

/// "1-7" or "1,2,5" (or a mix such as "1-3,9").
inline std::vector<std::uint64_t> parse_seed_list(const std::string& text)
{
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = config_detail::trim(item);
        if (item.empty())
            continue;
        const auto dash = item.find('-');
        if (dash == std::string::npos) {
            seeds.push_back(config_detail::to_uint("seeds", item));
            continue;
        }
        const auto lo = config_detail::to_uint("seeds", config_detail::trim(item.substr(0, dash)));
        const auto hi = config_detail::to_uint("seeds", config_detail::trim(item.substr(dash + 1)));
        if (hi < lo)
            throw std::invalid_argument("seed range '" + item + "' is decreasing");
        for (auto s = lo; s <= hi; ++s)
            seeds.push_back(s);
    }
    return seeds;
}

struct SweepOptions {
    std::optional<std::string> config_path;
    std::vector<std::string> overrides;
    std::vector<std::string> schedules;
    std::vector<std::uint64_t> seeds;
    std::string out_root = "sweep";
    std::string metric = "coverage";
    bool force = false;
    bool quiet = false;
};

inline int cmd_sweep(const SweepOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    std::vector<std::pair<SweepVariant, std::uint64_t>> jobs;
    std::vector<RunOptions> runs;
    try {
        if (opt.schedules.empty())
            throw std::invalid_argument("sweep needs at least one schedule");
        if (opt.seeds.empty())
            throw std::invalid_argument("sweep needs at least one seed");
        for (const auto& s : opt.schedules) {
            const SweepVariant v = parse_sweep_variant(s);
            for (std::uint64_t seed : opt.seeds) {
                RunOptions r;
                r.config_path = opt.config_path;
                r.overrides = opt.overrides;
                for (const auto& [k, val] : v.assignments)
                    r.overrides.push_back(k + "=" + val);
                r.seed = seed;
                r.out_dir = (fs::path(opt.out_root) / (v.label + "_seed" + std::to_string(seed))).string();
                r.force = opt.force;
                r.quiet = opt.quiet;
                resolve_run_config(r); // fail fast on bad configs
                if (!opt.force && has_run_outputs(*r.out_dir))
                    throw std::runtime_error("'" + *r.out_dir + "' already holds run outputs (use --force to overwrite)");
                jobs.emplace_back(v, seed);
                runs.push_back(std::move(r));
            }
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    CompareOptions cmp;
    cmp.metric = opt.metric;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        out << "[" << (i + 1) << "/" << runs.size() << "] " << *runs[i].out_dir << '\n';
        if (const int rc = cmd_run(runs[i], out, err); rc != 0)
            return rc;
        cmp.run_dirs.push_back(*runs[i].out_dir);
        cmp.labels.push_back(jobs[i].first.label);
    }
    cmp.out_path = (fs::path(opt.out_root) / ("comparison_" + opt.metric + ".csv")).string();
    if (opt.seeds.size() < 2 || opt.schedules.size() < 2) {
        out << "skipping comparison: it needs at least two schedules and two seeds\n";
        return 0;
    }
    return cmd_compare(cmp, out, err);
}

struct ExportCentroidsOptions {
    std::optional<std::string> config_path;
    std::vector<std::string> overrides;
    std::string out_path = "centroids.csv";
};

inline int cmd_export_centroids(const ExportCentroidsOptions& opt, std::ostream& out = std::cout,
                                std::ostream& err = std::cerr)
{
    try {
        RunOptions r;
        r.config_path = opt.config_path;
        r.overrides = opt.overrides;
        const RunConfig config = resolve_config(gather_assignments(r));
        const Task task = make_task(config);
        const Centroids c
            = compute_cvt_centroids(config.k, task.descriptor_dim, config.resolved_cvt_samples(), config.cvt_seed);
        write_file(opt.out_path, [&](std::ostream& os) { write_centroids_csv(os, c); });
        out << "wrote " << c.size() << " centroids to " << opt.out_path << '\n';
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace smol::cli
