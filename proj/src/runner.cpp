#include "bgadl/runner.hpp"

#include <filesystem>
#include <fstream>

namespace bgadl {

std::string metrics_path_for(const ExperimentConfig& cfg, const std::string& out_dir) {
    return (std::filesystem::path(out_dir) /
            (to_string(cfg.strategy) + "_seed" + std::to_string(cfg.seed) + ".csv"))
        .string();
}

std::string checkpoint_path_for(const ExperimentConfig& cfg, const std::string& out_dir) {
    return (std::filesystem::path(out_dir) /
            (to_string(cfg.strategy) + "_seed" + std::to_string(cfg.seed) + ".ckpt"))
        .string();
}

RunResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::string csv_path = metrics_path_for(cfg, out_dir);
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw std::runtime_error("run_experiment: cannot open " + csv_path + " for writing");
    csv << kMetricsCsvHeader << '\n';
    csv.flush();
    // rows are flushed as they are produced so an abort retains partial output
    RunResult result = run_strategy(cfg, [&csv, &csv_path](const MetricsRecord& r) {
        csv << metrics_csv_row(r) << '\n';
        csv.flush();
        if (!csv) throw std::runtime_error("run_experiment: write failed for " + csv_path);
    });
    csv.close();
    save_checkpoint(checkpoint_path_for(cfg, out_dir), result.params);
    return result;
}

} // namespace bgadl
