#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ust4/parallel.hpp"

namespace ust4::lab {

/// Version of the CSV layout, recorded in every JSON summary.
inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kCsvHeader = "n,p_hat,ci_lo,ci_hi,samples,metadata";

struct ExperimentInfo {
    std::string name;
    /// The statement the experiment measures.
    std::string anchor;
    /// Meaning of the n and p_hat columns.
    std::string columns;
};

const std::vector<ExperimentInfo>& experiments();
const ExperimentInfo* find_experiment(std::string_view name);

/// Invalid configuration; one message per offending field.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> f);
    std::vector<std::string> fields;
};

struct CsvRow {
    double n = 0;
    double p_hat = 0, ci_lo = 0, ci_hi = 0;
    std::uint64_t samples = 0;
    nlohmann::json meta = nlohmann::json::object();
};

std::string render_csv(const std::vector<CsvRow>& rows);

struct Output {
    std::vector<CsvRow> rows;
    /// Fits, bands and checks computed from the rows.
    nlohmann::json summary = nlohmann::json::object();
};

/// A validated configuration, ready to run.
struct Job {
    std::string experiment;
    std::uint64_t seed = 1;
    std::optional<unsigned> workers;
    std::optional<double> budget_seconds;
    std::string out_dir = ".";
    std::string csv_name, json_name;
    /// Parameters after defaults were filled in.
    nlohmann::json params;
    std::function<Output(const RunContext&)> execute;
};

/// Parses a TOML config. Top-level keys: experiment (required), seed, workers,
/// budget_seconds, out_dir, csv, json, and a [params] table whose keys depend on
/// the experiment. Unknown keys are rejected. Throws ConfigError.
Job parse_config(std::string_view toml_text, std::string_view source = "config");

/// Worker count: explicit value, else LAB_WORKERS, else hardware concurrency.
unsigned resolve_workers(std::optional<unsigned> explicit_workers);

struct RunResult {
    std::string csv;
    nlohmann::json summary;
    bool partial = false;
};

/// Runs the job and assembles the CSV text and JSON summary (without writing files).
RunResult run_job(const Job& job, unsigned workers);

}  // namespace ust4::lab
