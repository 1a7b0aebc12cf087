#include "bgadl/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bgadl {

const char* const kMetricsCsvHeader =
    "iteration,labeled_count,generated_count,pool_count,test_accuracy,mean_acq_selected,"
    "mean_acq_generated,mean_recon_distance,loss_rec,loss_prior,loss_disc,loss_cls,loss_gen,wall_seconds";

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string metrics_csv_row(const MetricsRecord& r) {
    std::ostringstream os;
    os << r.iteration << ',' << r.labeled_count << ',' << r.generated_count << ',' << r.pool_count << ','
       << format_double(r.test_accuracy) << ',' << format_double(r.mean_acq_selected) << ','
       << format_double(r.mean_acq_generated) << ',' << format_double(r.mean_recon_distance) << ','
       << format_double(r.loss_rec) << ',' << format_double(r.loss_prior) << ',' << format_double(r.loss_disc)
       << ',' << format_double(r.loss_cls) << ',' << format_double(r.loss_gen) << ',';
    char wall[32];
    std::snprintf(wall, sizeof(wall), "%.6f", r.wall_seconds);
    os << wall;
    return os.str();
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRecord>& records) {
    std::ofstream os(path, std::ios::binary); // binary keeps line endings exact
    if (!os) throw std::runtime_error("metrics: cannot open " + path + " for writing");
    os << kMetricsCsvHeader << '\n';
    for (const MetricsRecord& r : records) os << metrics_csv_row(r) << '\n';
    if (!os) throw std::runtime_error("metrics: write failed for " + path);
}

std::vector<MetricsRecord> read_metrics_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("metrics: cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("metrics: empty file " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kMetricsCsvHeader) throw std::runtime_error("metrics: schema mismatch in " + path);
    std::vector<MetricsRecord> out;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                f.push_back(line.substr(start));
                break;
            }
            f.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        if (f.size() != 14) throw std::runtime_error("metrics: bad row in " + path);
        MetricsRecord r;
        r.iteration = std::stoi(f[0]);
        r.labeled_count = static_cast<std::size_t>(std::stoull(f[1]));
        r.generated_count = std::stol(f[2]);
        r.pool_count = static_cast<std::size_t>(std::stoull(f[3]));
        r.test_accuracy = std::stod(f[4]);
        r.mean_acq_selected = std::stod(f[5]);
        r.mean_acq_generated = std::stod(f[6]);
        r.mean_recon_distance = std::stod(f[7]);
        r.loss_rec = std::stod(f[8]);
        r.loss_prior = std::stod(f[9]);
        r.loss_disc = std::stod(f[10]);
        r.loss_cls = std::stod(f[11]);
        r.loss_gen = std::stod(f[12]);
        r.wall_seconds = std::stod(f[13]);
        out.push_back(r);
    }
    return out;
}

} // namespace bgadl
