#include "bgadl/plot.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace bgadl {

PlotKind plot_kind_from_string(const std::string& s) {
    if (s == "accuracy_curve") return PlotKind::AccuracyCurve;
    if (s == "acq_value_curve") return PlotKind::AcqValueCurve;
    if (s == "recon_curve") return PlotKind::ReconCurve;
    throw std::invalid_argument("unknown plot kind '" + s + "'");
}

std::string PlotTable::to_csv() const {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out += ',';
        out += header[i];
    }
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

RunName parse_run_name(const std::string& path) {
    std::size_t slash = path.find_last_of("/\\");
    std::string stem = slash == std::string::npos ? path : path.substr(slash + 1);
    if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".csv") stem = stem.substr(0, stem.size() - 4);
    RunName rn;
    const std::string marker = "_seed";
    const std::size_t at = stem.rfind(marker);
    if (at != std::string::npos) {
        const std::string tail = stem.substr(at + marker.size());
        if (!tail.empty() && tail.find_first_not_of("0123456789") == std::string::npos) {
            rn.strategy = stem.substr(0, at);
            rn.seed = std::stoull(tail);
            return rn;
        }
    }
    rn.strategy = stem;
    rn.seed = 0;
    return rn;
}

namespace {

struct LongRow {
    std::string strategy;
    double x;
    std::uint64_t seed;
    double y;
};

double x_value(PlotKind kind, const MetricsRecord& r, double original_train_count) {
    if (kind == PlotKind::AccuracyCurve) {
        const double real = static_cast<double>(r.labeled_count) - static_cast<double>(r.generated_count);
        return original_train_count > 0 ? real / original_train_count : 0.0;
    }
    return static_cast<double>(r.iteration);
}

double y_value(PlotKind kind, const MetricsRecord& r) {
    switch (kind) {
        case PlotKind::AccuracyCurve: return r.test_accuracy;
        case PlotKind::AcqValueCurve: return r.mean_acq_generated;
        case PlotKind::ReconCurve: return r.mean_recon_distance;
    }
    throw std::logic_error("bad plot kind");
}

} // namespace

PlotTable emit_plot_data(const std::vector<std::string>& csv_paths, PlotKind kind, bool aggregate) {
    if (csv_paths.empty()) throw std::invalid_argument("emit_plot_data: no input files");
    std::vector<LongRow> rows;
    for (const std::string& path : csv_paths) {
        const std::vector<MetricsRecord> recs = read_metrics_csv(path); // schema mismatch throws here
        const RunName rn = parse_run_name(path);
        double original = 0.0;
        if (!recs.empty())
            original = static_cast<double>(recs.front().labeled_count) -
                       static_cast<double>(recs.front().generated_count) +
                       static_cast<double>(recs.front().pool_count);
        for (const MetricsRecord& r : recs)
            rows.push_back({rn.strategy, x_value(kind, r, original), rn.seed, y_value(kind, r)});
    }

    PlotTable out;
    if (!aggregate) {
        out.header = {"strategy", "x", "seed", "y"};
        std::stable_sort(rows.begin(), rows.end(), [](const LongRow& a, const LongRow& b) {
            if (a.strategy != b.strategy) return a.strategy < b.strategy;
            if (a.x != b.x) return a.x < b.x;
            return a.seed < b.seed;
        });
        for (const LongRow& r : rows)
            out.rows.push_back({r.strategy, format_double(r.x), std::to_string(r.seed), format_double(r.y)});
        return out;
    }

    std::map<std::pair<std::string, double>, std::vector<double>> groups;
    for (const LongRow& r : rows) groups[{r.strategy, r.x}].push_back(r.y);
    out.header = {"strategy", "x", "mean", "stdev", "n"};
    for (const auto& [key, ys] : groups) {
        double mean = 0.0;
        for (double y : ys) mean += y;
        mean /= static_cast<double>(ys.size());
        double stdev = 0.0;
        if (ys.size() > 1) {
            double acc = 0.0;
            for (double y : ys) acc += (y - mean) * (y - mean);
            stdev = std::sqrt(acc / static_cast<double>(ys.size() - 1));
        }
        out.rows.push_back({key.first, format_double(key.second), format_double(mean), format_double(stdev),
                            std::to_string(ys.size())});
    }
    return out;
}

} // namespace bgadl
