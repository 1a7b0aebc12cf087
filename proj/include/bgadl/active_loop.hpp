#pragma once
#include "bgadl/acquisition.hpp"
#include "bgadl/config.hpp"
#include "bgadl/data_io.hpp"
#include "bgadl/generative.hpp"
#include "bgadl/metrics.hpp"
#include "bgadl/nets.hpp"

namespace bgadl {

// Per-iteration values that have no CSV column: the common-random-number
// acquisition gap between each x* and its augmentation, and the spread of the
// subsample scores it is compared against.
struct IterationDiagnostics {
    std::vector<double> prop1_gaps;
    double median_prop1_gap = 0.0;
    double score_iqr = 0.0;
};

struct IterationResult {
    MetricsRecord record;
    IterationDiagnostics diagnostics;
};

struct RunResult {
    std::vector<MetricsRecord> records;                // records[0] is the pretrain row
    std::vector<IterationDiagnostics> diagnostics;     // aligned with records
    ParamStore params;
};

RawDataset build_dataset(const ExperimentConfig& cfg);

ParamStore make_param_store(const ExperimentConfig& cfg, std::size_t data_dim, int class_count);

// Standard mini-batch cross-entropy training of the classifier on the current
// labeled set (dropout stochastic). epochs == 0 leaves parameters unchanged.
void pretrain_classifier(ParamStore& store, const DatasetState& state, int epochs, const ExperimentConfig& cfg);

double evaluate_accuracy(const ClassifierParams& cls, const std::vector<LabeledExample>& test);

// Label-preserving transform: shift by up to 2 cells with zero padding, plus
// an optional horizontal flip when the dataset declares flip-safety.
Tensor pmda_transform(const Tensor& x, const DatasetMeta& meta, RngStream& stream);
Tensor pmda_transform_with(const Tensor& x, const DatasetMeta& meta, int dx, int dy, bool flip);

// One acquisition iteration (1-based); mutates state and params per strategy
// and verifies the bookkeeping deltas before returning.
IterationResult acquisition_iteration(DatasetState& state, ParamStore& store, const ExperimentConfig& cfg,
                                      int iteration);

// Pretrain, then `iterations` acquisition iterations; deterministic per
// (config, seed). on_record, when set, sees each MetricsRecord as soon as it
// exists (the runner uses it to flush partial CSVs before an abort).
using RecordObserver = std::function<void(const MetricsRecord&)>;
RunResult run_strategy(const ExperimentConfig& cfg, const RecordObserver& on_record = nullptr);

} // namespace bgadl
