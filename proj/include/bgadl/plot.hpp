#pragma once
#include <string>
#include <vector>

#include "bgadl/metrics.hpp"

namespace bgadl {

enum class PlotKind { AccuracyCurve, AcqValueCurve, ReconCurve };

PlotKind plot_kind_from_string(const std::string& s);

struct PlotTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string to_csv() const;
};

// (strategy, seed) parsed from the run_experiment naming convention
// <strategy>_seed<N>.csv; unparsable names degrade to (stem, 0).
struct RunName {
    std::string strategy;
    std::uint64_t seed = 0;
};
RunName parse_run_name(const std::string& path);

// Long-format plot table from metrics CSVs sharing the pinned schema.
//   accuracy_curve:  x = real labeled fraction of the original train set
//   acq_value_curve: x = iteration, y = mean_acq_generated
//   recon_curve:     x = iteration, y = mean_recon_distance
// aggregate=false → strategy,x,seed,y rows; true → strategy,x,mean,stdev,n
// (mean ± sample standard deviation over seeds).
PlotTable emit_plot_data(const std::vector<std::string>& csv_paths, PlotKind kind, bool aggregate);

} // namespace bgadl
