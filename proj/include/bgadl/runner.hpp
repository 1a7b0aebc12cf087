#pragma once
#include <string>

#include "bgadl/active_loop.hpp"

namespace bgadl {

// Runs the configured experiment, writing <out_dir>/<strategy>_seed<N>.csv
// (header + one row per iteration, byte-deterministic per config and seed)
// and a parameter checkpoint next to it. Returns the run result.
RunResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

std::string metrics_path_for(const ExperimentConfig& cfg, const std::string& out_dir);
std::string checkpoint_path_for(const ExperimentConfig& cfg, const std::string& out_dir);

} // namespace bgadl
