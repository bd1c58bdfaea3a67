#pragma once

#include "confmdp/config.hpp"

#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace confmdp {

/// Bad command-line usage (wrong number of configs, mismatched environments).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentOutput {
    RunResult result;
    std::filesystem::path iterations_csv;
    std::filesystem::path summary;
};

/// iterations.csv; omega columns are written only for parametric model spaces.
void write_iterations_csv(std::ostream& out, const RunResult& result, std::size_t n_vertices);
void write_summary(std::ostream& out, const RunConfig& config, const RunResult& result);

/// Solves the configured problem without writing anything.
RunResult solve(const RunConfig& config);

/// Solves and writes iterations.csv and summary.txt into `out_dir` (created if needed).
ExperimentOutput run_experiment(const RunConfig& config, const std::filesystem::path& out_dir);
ExperimentOutput run_experiment(const RunConfig& config);

struct ComparisonRow {
    std::string label;
    Strategy strategy = Strategy::SPMI;
    TargetMode target_mode = TargetMode::Persistent;
    double final_j = 0.0;
    std::size_t iterations = 0;
    Termination reason = Termination::MaxIterations;
};

/**
 * Runs every config (each into its own subdirectory of `out_dir`) and writes
 * comparison.csv. Needs at least two configs describing the same environment.
 */
std::vector<ComparisonRow> compare_strategies(const std::vector<RunConfig>& configs,
                                              const std::filesystem::path& out_dir);

} // namespace confmdp
