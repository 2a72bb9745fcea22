#pragma once

#include <string>
#include <vector>

#include "semreid/eval/metrics.hpp"
#include "semreid/harness/config.hpp"

namespace semreid::harness {

struct RunResult {
  std::string run_dir;
  std::vector<std::string> report_paths;  // one EvalReport per fold
  std::vector<eval::EvalReport> fold_reports;
};

// Executes the configured pipeline variant: dataset -> split -> (filter) ->
// (GAN synthesis) -> classifier training -> evaluation. Every stage leaves
// an artifact or a recorded skip reason in the run directory's manifest.
RunResult run_experiment(const Config& cfg);

// Loss curves, CMC curves and confusion heat tables for an existing run
// directory, as SVG plus the raw delimited data.
void emit_plots(const std::string& run_dir);

}  // namespace semreid::harness
