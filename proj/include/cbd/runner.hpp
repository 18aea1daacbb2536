#pragma once
// Experiment runner: expands a validated config into a grid of CV cells plus
// transfer jobs, runs them on a bounded worker pool, and writes results.csv,
// rendered tables, fold manifests, saved source models, and a run manifest.
// Re-running the same config and seed reproduces results.csv byte for byte,
// whatever the worker count.

#include <string>
#include <vector>

#include "cbd/config.hpp"
#include "cbd/evaluation.hpp"

namespace cbd {

struct RunSummary {
    int exit_code = 0;                  // 0 clean, 2 when any cell failed
    std::vector<std::string> failures;  // one line per failed cell
    std::vector<EvalRow> rows;          // everything written to results.csv
    std::string results_csv;
    std::string manifest_path;
    double wall_seconds = 0.0;
};

RunSummary run_experiment(const ExperimentConfig& config);

} // namespace cbd
