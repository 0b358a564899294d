// smol: command-line front end for schedule experiments.
//
//   smol run --config cfg.txt --set schedule=smol --seed 3 --out runs/a
//   smol compare --metric coverage runs/a runs/b ... --label smol --label smol ...
//   smol sweep --config cfg.txt --schedules constant,smol,smol_human --seeds 1-7 --out sweep
//   smol export-centroids --config cfg.txt --out centroids.csv

#include <CLI11.hpp>

#include <smol/cli.hpp>

int main(int argc, char** argv)
{
    CLI::App app{"Quality-diversity runs with phase-wise alpha schedules"};
    app.require_subcommand(1);

    smol::cli::RunOptions run;
    std::string run_config;
    std::uint64_t run_seed = 0;
    std::string run_out;
    std::size_t run_workers = 0;
    auto* run_cmd = app.add_subcommand("run", "run one experiment and write its outputs");
    auto* run_config_opt = run_cmd->add_option("--config", run_config, "key = value config file")->check(CLI::ExistingFile);
    run_cmd->add_option("--set", run.overrides, "override one key (key=value); repeatable");
    auto* run_seed_opt = run_cmd->add_option("--seed", run_seed, "run seed");
    auto* run_out_opt = run_cmd->add_option("--out", run_out, "output directory");
    auto* run_workers_opt = run_cmd->add_option("--workers", run_workers, "evaluation threads")->check(CLI::PositiveNumber);
    run_cmd->add_flag("--force", run.force, "overwrite existing outputs");
    run_cmd->add_flag("--quiet", run.quiet, "only print the final summary");

    smol::cli::CompareOptions cmp;
    std::string cmp_out;
    bool cmp_lower = false;
    auto* cmp_cmd = app.add_subcommand("compare", "median and pairwise U-tests over final metric values");
    cmp_cmd->add_option("--metric", cmp.metric, "metric column")->capture_default_str();
    cmp_cmd->add_option("runs", cmp.run_dirs, "run directories")->required();
    cmp_cmd->add_option("--label", cmp.labels, "method label per run directory, in order")->required();
    auto* cmp_out_opt = cmp_cmd->add_option("--out", cmp_out, "also write the table to this file");
    cmp_cmd->add_flag("--lower-is-better", cmp_lower, "smaller metric values are better");

    smol::cli::SweepOptions sweep;
    std::string sweep_config;
    std::string sweep_seeds;
    auto* sweep_cmd = app.add_subcommand("sweep", "run every schedule for every seed, then compare");
    auto* sweep_config_opt = sweep_cmd->add_option("--config", sweep_config, "base config file")->check(CLI::ExistingFile);
    sweep_cmd->add_option("--set", sweep.overrides, "override one key (key=value); repeatable");
    std::vector<std::string> sweep_schedules;
    sweep_cmd
        ->add_option("--schedules", sweep_schedules,
                     "comma-separated schedule names, or label:key=value,... entries separated by ';'")
        ->required();
    sweep_cmd->add_option("--seeds", sweep_seeds, "seed list such as 1-7 or 1,2,5")->required();
    sweep_cmd->add_option("--out", sweep.out_root, "output root")->capture_default_str();
    sweep_cmd->add_option("--metric", sweep.metric, "metric for the comparison table")->capture_default_str();
    sweep_cmd->add_flag("--force", sweep.force, "overwrite existing outputs");
    sweep_cmd->add_flag("--quiet", sweep.quiet, "less progress output");

    smol::cli::ExportCentroidsOptions exp;
    std::string exp_config;
    auto* exp_cmd = app.add_subcommand("export-centroids", "compute and write the CVT centroids");
    auto* exp_config_opt = exp_cmd->add_option("--config", exp_config, "config file")->check(CLI::ExistingFile);
    exp_cmd->add_option("--set", exp.overrides, "override one key (key=value); repeatable");
    exp_cmd->add_option("--out", exp.out_path, "output file")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    if (run_cmd->parsed()) {
        if (*run_config_opt)
            run.config_path = run_config;
        if (*run_seed_opt)
            run.seed = run_seed;
        if (*run_out_opt)
            run.out_dir = run_out;
        if (*run_workers_opt)
            run.overrides.push_back("workers=" + std::to_string(run_workers));
        return smol::cli::cmd_run(run);
    }
    if (cmp_cmd->parsed()) {
        if (*cmp_out_opt)
            cmp.out_path = cmp_out;
        cmp.lower_is_better = cmp_lower;
        return smol::cli::cmd_compare(cmp);
    }
    if (sweep_cmd->parsed()) {
        if (*sweep_config_opt)
            sweep.config_path = sweep_config;
        try {
            sweep.seeds = smol::cli::parse_seed_list(sweep_seeds);
            sweep.schedules = smol::cli::split_schedule_list(sweep_schedules);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 2;
        }
        return smol::cli::cmd_sweep(sweep);
    }
    if (exp_cmd->parsed()) {
        if (*exp_config_opt)
            exp.config_path = exp_config;
        return smol::cli::cmd_export_centroids(exp);
    }
    return 1;
}
