#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include <smol/cli.hpp>

using namespace smol;
using namespace smol::cli;
namespace fs = std::filesystem;

namespace {

const char* tiny_config = R"(# tiny desk run
task = scaled_arm
k = 32
cvt_samples = 3200
batch_size = 16
generations_per_phase = 2
total_phases = 5
final_fixed_phases = 1
schedule = smol
seed = 1
)";

struct TempDir {
    fs::path path;
    TempDir()
    {
        static int counter = 0;
        path = fs::temp_directory_path() / ("smol_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path operator/(const std::string& s) const { return path / s; }
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_config(const TempDir& dir, const std::string& text = tiny_config)
{
    const fs::path p = dir / "cfg.txt";
    std::ofstream(p) << text;
    return p;
}

RunOptions run_opts(const fs::path& cfg, const fs::path& out)
{
    RunOptions o;
    o.config_path = cfg.string();
    o.out_dir = out.string();
    o.quiet = true;
    return o;
}

} // namespace

TEST_CASE("config text parsing")
{
    const auto kv = parse_config_text("a = 1\n# comment\n\n  b=two  # trailing\nc =\n");
    REQUIRE(kv.size() == 3);
    CHECK(kv[0] == std::pair<std::string, std::string>{"a", "1"});
    CHECK(kv[1] == std::pair<std::string, std::string>{"b", "two"});
    CHECK(kv[2] == std::pair<std::string, std::string>{"c", ""});
    CHECK_THROWS_AS(parse_config_text("no equals sign\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_assignment("=3"), std::invalid_argument);
}

TEST_CASE("resolved config applies keys and keeps defaults")
{
    const RunConfig c = resolve_config(parse_config_text(tiny_config));
    CHECK(c.k == 32);
    CHECK(c.batch_size == 16);
    CHECK(c.schedule.total_phases == 5);
    CHECK(std::holds_alternative<schedule::Smol>(c.schedule.kind));
    CHECK(c.init_sigma == 0.1);
    CHECK(c.variation.sigma_iso == 0.005);

    const RunConfig r = resolve_config({{"random_lo", "0.8"}, {"schedule", "random"}, {"random_hi", "1.2"}});
    const auto& ru = std::get<schedule::RandomUniform>(r.schedule.kind);
    CHECK(ru.lo == 0.8);
    CHECK(ru.hi == 1.2);

    const RunConfig k = resolve_config({{"schedule", "constant"}, {"constant_alpha", "1.25"}});
    CHECK(std::get<schedule::Constant>(k.schedule.kind).alpha == 1.25);

    const RunConfig h = resolve_config({{"crawler_hidden", "64, 64"}, {"task", "crawler"}});
    CHECK(h.crawler.hidden == std::vector<std::size_t>{64, 64});

    // later assignments win
    CHECK(resolve_config({{"k", "10"}, {"k", "20"}}).k == 20);
}

TEST_CASE("config errors name the offending key")
{
    auto key_of = [](const KeyValues& kv) -> std::string {
        try {
            resolve_config(kv);
        } catch (const ConfigError& e) {
            return e.key();
        }
        return "<none>";
    };
    CHECK(key_of({{"colour", "red"}}) == "colour");
    CHECK(key_of({{"schedule", "linear"}}) == "schedule");
    CHECK(key_of({{"k", "many"}}) == "k");
    CHECK(key_of({{"k", "0"}}) == "k");
    CHECK(key_of({{"k", "-3"}}) == "k");
    CHECK(key_of({{"batch_size", "0"}}) == "batch_size");
    CHECK(key_of({{"init_sigma", "1e"}}) == "init_sigma");
    CHECK(key_of({{"extinction_sigma", "2"}}) == "extinction_sigma");
    CHECK(key_of({{"final_fixed_phases", "100"}}) == "final_fixed_phases");
    CHECK(key_of({{"sigma_line", "-1"}}) == "sigma_line");
    CHECK(key_of({{"task", "crawler"}, {"crawler_dt", "0.5"}}) == "crawler_dt");
    CHECK(key_of({{"task", "crawler"}, {"crawler_mass", "0"}}) == "crawler_mass");
    CHECK(key_of({{"task", "crawler"}, {"crawler_masses", "1"}}) == "crawler_masses");
    CHECK(key_of({{"task", "crawler"}, {"crawler_hidden", "16,0"}}) == "crawler_hidden");
    CHECK(key_of({{"arm_joints", "1"}}) == "arm_joints");
    CHECK(key_of({{"schedule", "random"}, {"random_lo", "2"}}) == "random_lo");
    CHECK(key_of({{"schedule", "constant"}, {"constant_alpha", "0"}}) == "constant_alpha");
    CHECK(key_of({{"schedule", "smol_human"}, {"human_peak_fraction", "0.99"}}) == "human_peak_fraction");
    CHECK(key_of({{"trace_best", "maybe"}}) == "trace_best");
    CHECK(key_of({{"task", "ant"}}) == "task");
    CHECK(key_of({{"cvt_samples", "5"}}) == "cvt_samples");
}

TEST_CASE("config text round-trips")
{
    RunConfig c = resolve_config({{"schedule", "random"}, {"random_lo", "0.7"}, {"init_sigma", "0.123456789"},
                                  {"seed", "18446744073709551615"}, {"crawler_friction", "0.3"}});
    const std::string text = to_config_text(c);
    const RunConfig back = resolve_config(parse_config_text(text));
    CHECK(to_config_text(back) == text);
    CHECK(back.seed == 18446744073709551615ull);
    CHECK(back.init_sigma == 0.123456789);
    CHECK(text.find("constant_alpha") == std::string::npos);
    CHECK(text.find("random_lo = 0.69999999999999996") != std::string::npos);
}

TEST_CASE("run writes the four outputs and records overrides")
{
    TempDir dir;
    const fs::path cfg = write_config(dir);
    RunOptions o = run_opts(cfg, dir / "run");
    o.overrides = {"schedule=constant"};
    std::ostringstream out, err;
    REQUIRE(cmd_run(o, out, err) == 0);
    for (const char* f : {"metrics.csv", "archive.csv", "centroids.csv", "run_meta"})
        CHECK(fs::exists(dir / "run" / f));
    CHECK_FALSE(fs::exists(dir / "run" / "trajectory.csv"));
    const std::string meta = slurp(dir / "run" / "run_meta");
    CHECK(meta.find("# override: schedule=constant") != std::string::npos);
    CHECK(meta.find("\nschedule = constant\n") != std::string::npos);
    CHECK(meta.find("\nseed = 1\n") != std::string::npos);

    // the centroid file has k rows plus a header
    std::ifstream cin(dir / "run" / "centroids.csv");
    std::size_t lines = 0;
    for (std::string l; std::getline(cin, l);)
        ++lines;
    CHECK(lines == 33);
}

TEST_CASE("run refuses to overwrite without force")
{
    TempDir dir;
    const fs::path cfg = write_config(dir);
    std::ostringstream out, err;
    REQUIRE(cmd_run(run_opts(cfg, dir / "run"), out, err) == 0);
    CHECK(cmd_run(run_opts(cfg, dir / "run"), out, err) != 0);
    CHECK(err.str().find("--force") != std::string::npos);
    RunOptions forced = run_opts(cfg, dir / "run");
    forced.force = true;
    CHECK(cmd_run(forced, out, err) == 0);
}

TEST_CASE("run reports invalid keys with a nonzero status")
{
    TempDir dir;
    const fs::path cfg = write_config(dir);
    RunOptions o = run_opts(cfg, dir / "bad");
    o.overrides = {"schedule=sideways"};
    std::ostringstream out, err;
    CHECK(cmd_run(o, out, err) != 0);
    CHECK(err.str().find("'schedule'") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "bad" / "metrics.csv"));

    RunOptions missing;
    missing.config_path = (dir / "nope.txt").string();
    CHECK(cmd_run(missing, out, err) != 0);
}

TEST_CASE("replaying run_meta reproduces the metrics")
{
    TempDir dir;
    const fs::path cfg = write_config(dir);
    std::ostringstream out, err;
    RunOptions first = run_opts(cfg, dir / "a");
    first.overrides = {"schedule=smol_human", "human_peak_fraction=0.4", "extinction_sigma=0.2"};
    REQUIRE(cmd_run(first, out, err) == 0);

    RunOptions replay;
    replay.config_path = (dir / "a" / "run_meta").string();
    replay.out_dir = (dir / "b").string();
    replay.quiet = true;
    REQUIRE(cmd_run(replay, out, err) == 0);
    CHECK(slurp(dir / "a" / "metrics.csv") == slurp(dir / "b" / "metrics.csv"));
    CHECK(slurp(dir / "a" / "archive.csv") == slurp(dir / "b" / "archive.csv"));
}

TEST_CASE("default output directory honours the environment")
{
    TempDir dir;
    const fs::path cfg = write_config(dir);
    ::setenv(output_root_env, dir.path.c_str(), 1);
    RunOptions o;
    o.config_path = cfg.string();
    o.seed = 3;
    o.quiet = true;
    std::ostringstream out, err;
    REQUIRE(cmd_run(o, out, err) == 0);
    CHECK(fs::exists(dir / "smol_seed3" / "metrics.csv"));
    ::unsetenv(output_root_env);
    CHECK(default_output_dir(RunConfig{}) == (fs::path("runs") / "constant_seed0").string());
}

TEST_CASE("compare builds the pairwise table")
{
    TempDir dir;
    const fs::path cfg = write_config(dir);
    std::ostringstream out, err;
    CompareOptions cmp;
    for (const char* sched : {"smol", "constant"})
        for (int seed = 1; seed <= 7; ++seed) {
            RunOptions o = run_opts(cfg, dir / (std::string(sched) + std::to_string(seed)));
            o.overrides = {std::string("schedule=") + sched};
            o.seed = seed;
            REQUIRE(cmd_run(o, out, err) == 0);
            cmp.run_dirs.push_back(*o.out_dir);
            cmp.labels.push_back(sched);
        }
    cmp.out_path = (dir / "table.csv").string();
    std::ostringstream cout_, cerr_;
    REQUIRE(cmd_compare(cmp, cout_, cerr_) == 0);
    const std::string table = slurp(dir / "table.csv");
    std::istringstream is(table);
    std::string header, row1, row2, extra;
    std::getline(is, header);
    std::getline(is, row1);
    std::getline(is, row2);
    CHECK_FALSE(std::getline(is, extra));
    CHECK(header == "method,median,smol,constant");
    CHECK(row1.rfind("smol,", 0) == 0);
    CHECK(row1.find(",-,") != std::string::npos);
    CHECK(row2.rfind("constant,", 0) == 0);
    CHECK(row2.back() == '-');
    CHECK(cout_.str().find(table) != std::string::npos);

    SECTION("one seed for a label is an error")
    {
        CompareOptions few = cmp;
        few.out_path.reset();
        few.run_dirs.resize(8);
        few.labels.resize(8);
        std::ostringstream o2, e2;
        CHECK(cmd_compare(few, o2, e2) != 0);
        CHECK(e2.str().find("at least 2") != std::string::npos);
    }
    SECTION("unknown metric lists the valid ones")
    {
        CompareOptions bad = cmp;
        bad.metric = "qd_score";
        std::ostringstream o2, e2;
        CHECK(cmd_compare(bad, o2, e2) != 0);
        CHECK(e2.str().find("coverage") != std::string::npos);
        CHECK(e2.str().find("max_fitness") != std::string::npos);
    }
    SECTION("labels must line up with directories")
    {
        CompareOptions bad = cmp;
        bad.labels.pop_back();
        std::ostringstream o2, e2;
        CHECK(cmd_compare(bad, o2, e2) != 0);
    }
    SECTION("missing metrics file")
    {
        CompareOptions bad = cmp;
        bad.run_dirs[0] = (dir / "does_not_exist").string();
        std::ostringstream o2, e2;
        CHECK(cmd_compare(bad, o2, e2) != 0);
        CHECK(e2.str().find("metrics") != std::string::npos);
    }
}

TEST_CASE("sweep runs the cross product and compares")
{
    TempDir dir;
    const fs::path cfg = write_config(dir);
    SweepOptions s;
    s.config_path = cfg.string();
    s.schedules = {"smol", "constant"};
    s.seeds = parse_seed_list("1-7");
    s.out_root = (dir / "sweep").string();
    s.quiet = true;
    std::ostringstream out, err;
    REQUIRE(cmd_sweep(s, out, err) == 0);
    std::size_t runs = 0;
    for (const auto& e : fs::directory_iterator(dir / "sweep"))
        if (e.is_directory()) {
            ++runs;
            CHECK(fs::exists(e.path() / "metrics.csv"));
        }
    CHECK(runs == 14);
    CHECK(fs::exists(dir / "sweep" / "smol_seed7" / "run_meta"));
    CHECK(slurp(dir / "sweep" / "comparison_coverage.csv").rfind("method,median,smol,constant\n", 0) == 0);

    SECTION("rerun refuses to overwrite")
    {
        std::ostringstream o2, e2;
        CHECK(cmd_sweep(s, o2, e2) != 0);
        CHECK(e2.str().find("--force") != std::string::npos);
        s.force = true;
        s.seeds = {1, 2};
        CHECK(cmd_sweep(s, o2, e2) == 0);
    }
    SECTION("empty seed list")
    {
        s.seeds.clear();
        std::ostringstream o2, e2;
        CHECK(cmd_sweep(s, o2, e2) != 0);
        CHECK(e2.str().find("seed") != std::string::npos);
    }
}

TEST_CASE("sweep entries with custom labels")
{
    TempDir dir;
    const fs::path cfg = write_config(dir);
    SweepOptions s;
    s.config_path = cfg.string();
    s.schedules = split_schedule_list({"smol", "ext50:schedule=constant,extinction_sigma=0.5"});
    REQUIRE(s.schedules.size() == 2);
    s.seeds = {4, 5};
    s.out_root = (dir / "sw").string();
    s.quiet = true;
    std::ostringstream out, err;
    REQUIRE(cmd_sweep(s, out, err) == 0);
    const std::string meta = slurp(dir / "sw" / "ext50_seed5" / "run_meta");
    CHECK(meta.find("\nextinction_sigma = 0.5\n") != std::string::npos);
    CHECK(meta.find("\nschedule = constant\n") != std::string::npos);

    s.schedules = {"bogus"};
    CHECK(cmd_sweep(s, out, err) != 0);
}

TEST_CASE("list parsing helpers")
{
    CHECK(parse_seed_list("1-3,9") == std::vector<std::uint64_t>{1, 2, 3, 9});
    CHECK(parse_seed_list("5") == std::vector<std::uint64_t>{5});
    CHECK(parse_seed_list("").empty());
    CHECK_THROWS(parse_seed_list("3-1"));
    CHECK_THROWS(parse_seed_list("x"));
    CHECK(split_schedule_list({"constant,smol", "smol_human"})
          == std::vector<std::string>{"constant", "smol", "smol_human"});
    CHECK(split_schedule_list({"a:schedule=smol,seed=2;random"})
          == std::vector<std::string>{"a:schedule=smol,seed=2", "random"});
}

TEST_CASE("export-centroids writes the tessellation")
{
    TempDir dir;
    const fs::path cfg = write_config(dir);
    ExportCentroidsOptions o;
    o.config_path = cfg.string();
    o.out_path = (dir / "c.csv").string();
    std::ostringstream out, err;
    REQUIRE(cmd_export_centroids(o, out, err) == 0);
    std::ostringstream expected;
    write_centroids_csv(expected, compute_cvt_centroids(32, 2, 3200, 42));
    CHECK(slurp(dir / "c.csv") == expected.str());
}

TEST_CASE("crawler runs can dump the best trajectory")
{
    TempDir dir;
    const fs::path cfg = write_config(dir, std::string(tiny_config)
                                               + "task = crawler\ncrawler_episode_steps = 30\ntrace_best = true\n"
                                                 "total_phases = 2\n");
    std::ostringstream out, err;
    REQUIRE(cmd_run(run_opts(cfg, dir / "cr"), out, err) == 0);
    CHECK(slurp(dir / "cr" / "trajectory.csv").rfind("step,x0,y0,contact0", 0) == 0);
}
