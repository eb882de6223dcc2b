#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ust4/checks.hpp"
#include "ust4/lab.hpp"

namespace fs = std::filesystem;
using namespace ust4;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;

bool write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    f << text;
    return static_cast<bool>(f);
}

int cmd_run(const std::string& config_path, const std::optional<std::uint64_t>& seed, const std::optional<unsigned>& workers,
            const std::optional<std::string>& out_dir, const std::optional<double>& budget) {
    std::ifstream in(config_path);
    if (!in) {
        fmt::print(stderr, "config: cannot read '{}'\n", config_path);
        return kExitConfig;
    }
    std::stringstream text;
    text << in.rdbuf();
    lab::Job job;
    try {
        job = lab::parse_config(text.str(), config_path);
    } catch (const lab::ConfigError& e) {
        for (const auto& f : e.fields) fmt::print(stderr, "config error: {}\n", f);
        return kExitConfig;
    }
    if (seed) job.seed = *seed;
    if (workers) job.workers = *workers;
    if (out_dir) job.out_dir = *out_dir;
    if (budget) job.budget_seconds = *budget;

    const unsigned w = lab::resolve_workers(job.workers);
    auto res = lab::run_job(job, w);
    res.summary["workers"] = w;

    std::error_code ec;
    fs::create_directories(job.out_dir, ec);
    const fs::path csv = fs::path(job.out_dir) / job.csv_name;
    const fs::path json = fs::path(job.out_dir) / job.json_name;
    if (!write_file(csv, res.csv) || !write_file(json, res.summary.dump(2) + "\n")) {
        fmt::print(stderr, "cannot write output to '{}'\n", job.out_dir);
        return 1;
    }
    fmt::print("{}: wrote {} and {}{}\n", job.experiment, csv.string(), json.string(), res.partial ? " (partial: budget exceeded)" : "");
    return res.partial ? kExitBudget : 0;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, const std::optional<unsigned>& workers) {
    const unsigned w = lab::resolve_workers(workers);
    int failed = 0, total = 0;
    for (const auto& c : checks::catalogue()) {
        if (suite == "structural" && !c.structural) continue;
        auto r = checks::run(c.id, seed, w);
        fmt::print("{} {:2d} {} ({:.1f} s)\n", r.pass ? "PASS" : "FAIL", r.id, r.title, r.seconds);
        for (const auto& d : r.details) fmt::print("       {}\n", d);
        std::fflush(stdout);
        ++total;
        if (!r.pass) ++failed;
    }
    fmt::print("{} of {} checks passed\n", total - failed, total);
    return failed ? 1 : 0;
}

int cmd_describe(const std::string& name) {
    const auto* e = lab::find_experiment(name);
    if (!e) {
        fmt::print(stderr, "unknown experiment '{}'\n", name);
        return kExitConfig;
    }
    fmt::print("{}\n  measures: {}\n  columns:  {}\n  csv:      {}\n", e->name, e->anchor, e->columns, lab::kCsvHeader);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Runs the UST / loop-erased walk experiments on Z^4"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run one experiment from a TOML config");
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<std::string> out_dir;
    std::optional<double> budget;
    run->add_option("config,--config", config, "Config file")->required();
    run->add_option("--seed", seed, "Override the master seed");
    run->add_option("--workers", workers, "Worker threads (default: LAB_WORKERS, then all cores)")->check(CLI::PositiveNumber);
    run->add_option("--out-dir", out_dir, "Override the output directory");
    run->add_option("--budget-seconds", budget, "Wall-clock budget; partial results are written when it runs out")
        ->check(CLI::PositiveNumber);

    auto* verify = app.add_subcommand("verify", "Run the acceptance checks");
    std::string suite = "structural";
    std::uint64_t verify_seed = 1;
    std::optional<unsigned> verify_workers;
    verify->add_option("--suite", suite, "structural or all")->check(CLI::IsMember({"structural", "all"}));
    verify->add_option("--seed", verify_seed, "Master seed");
    verify->add_option("--workers", verify_workers, "Worker threads")->check(CLI::PositiveNumber);

    app.add_subcommand("list", "List experiments");

    auto* describe = app.add_subcommand("describe", "Describe one experiment");
    std::string name;
    describe->add_option("name", name, "Experiment name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    if (*run) return cmd_run(config, seed, workers, out_dir, budget);
    if (*verify) return cmd_verify(suite, verify_seed, verify_workers);
    if (*describe) return cmd_describe(name);
    for (const auto& e : lab::experiments()) fmt::print("{:<20} {}\n", e.name, e.anchor);
    return 0;
}
