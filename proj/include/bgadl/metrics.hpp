#pragma once
#include <string>
#include <vector>

namespace bgadl {

// One row per acquisition iteration (iteration 0 is the pretrain-only row).
struct MetricsRecord {
    int iteration = 0;
    std::size_t labeled_count = 0; // real + generated entries in the labeled set
    long generated_count = 0;
    std::size_t pool_count = 0;
    double test_accuracy = 0.0;
    double mean_acq_selected = 0.0;
    double mean_acq_generated = 0.0;
    double mean_recon_distance = 0.0;
    double loss_rec = 0.0;
    double loss_prior = 0.0;
    double loss_disc = 0.0;
    double loss_cls = 0.0;
    double loss_gen = 0.0;
    double wall_seconds = 0.0;
};

// Fixed ordered header; all tooling keys off these column names.
extern const char* const kMetricsCsvHeader;

std::string format_double(double v);
std::string metrics_csv_row(const MetricsRecord& r);
void write_metrics_csv(const std::string& path, const std::vector<MetricsRecord>& records);
std::vector<MetricsRecord> read_metrics_csv(const std::string& path);

} // namespace bgadl
