#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "bgadl/config.hpp"
#include "bgadl/data_io.hpp"
#include "bgadl/gradcheck.hpp"
#include "bgadl/plot.hpp"
#include "bgadl/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

void print_usage(std::ostream& os) {
    os << "usage: bgadl <subcommand> [options]\n"
          "\n"
          "subcommands:\n"
          "  run --config PATH [--seed N] [--out DIR]\n"
          "      run one experiment; writes <out>/<strategy>_seed<N>.csv and a\n"
          "      parameter checkpoint (out defaults to '.')\n"
          "  plot --kind accuracy_curve|acq_value_curve|recon_curve [--raw] [--out FILE] FILES...\n"
          "      long-format plot table from metrics CSVs; aggregates mean/stdev\n"
          "      over seeds unless --raw\n"
          "  gradcheck\n"
          "      run the full gradient suite and print the max relative error\n"
          "  synth-data --out PATH [--kind blobs|images] [--per-class N] [--classes C]\n"
          "             [--dim D] [--spread S] [--grid G] [--noise V] [--shift N] [--seed N]\n"
          "      write a fixture dataset container\n";
}

int usage_error(const std::string& msg) {
    std::cerr << "error: " << msg << "\n\n";
    print_usage(std::cerr);
    return kExitUsage;
}

bool take_value(const std::vector<std::string>& args, std::size_t& i, std::string& out) {
    if (i + 1 >= args.size()) return false;
    out = args[++i];
    return true;
}

int cmd_run(const std::vector<std::string>& args) {
    std::string config_path, out_dir = ".";
    std::string seed_override;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (!take_value(args, i, config_path)) return usage_error("--config needs a path");
        } else if (args[i] == "--seed") {
            if (!take_value(args, i, seed_override)) return usage_error("--seed needs a value");
        } else if (args[i] == "--out") {
            if (!take_value(args, i, out_dir)) return usage_error("--out needs a directory");
        } else {
            return usage_error("unknown option '" + args[i] + "' for run");
        }
    }
    if (config_path.empty()) return usage_error("run needs --config PATH");
    bgadl::ExperimentConfig cfg = bgadl::load_config(config_path);
    if (!seed_override.empty()) {
        bgadl::apply_config_entry(cfg, "seed", seed_override);
        bgadl::validate_config(cfg);
    }
    bgadl::RunResult result = bgadl::run_experiment(cfg, out_dir);
    std::cout << "wrote " << bgadl::metrics_path_for(cfg, out_dir) << " ("
              << result.records.size() << " rows), final accuracy "
              << bgadl::format_double(result.records.back().test_accuracy) << "\n";
    return kExitOk;
}

int cmd_plot(const std::vector<std::string>& args) {
    std::string kind_str, out_file;
    bool raw = false;
    std::vector<std::string> files;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--kind") {
            if (!take_value(args, i, kind_str)) return usage_error("--kind needs a value");
        } else if (args[i] == "--raw") {
            raw = true;
        } else if (args[i] == "--out") {
            if (!take_value(args, i, out_file)) return usage_error("--out needs a file");
        } else if (!args[i].empty() && args[i][0] == '-') {
            return usage_error("unknown option '" + args[i] + "' for plot");
        } else {
            files.push_back(args[i]);
        }
    }
    if (kind_str.empty()) return usage_error("plot needs --kind");
    if (files.empty()) return usage_error("plot needs at least one metrics CSV");
    bgadl::PlotKind kind;
    try {
        kind = bgadl::plot_kind_from_string(kind_str);
    } catch (const std::exception& e) {
        return usage_error(e.what());
    }
    bgadl::PlotTable table = bgadl::emit_plot_data(files, kind, !raw);
    if (out_file.empty()) {
        std::cout << table.to_csv();
    } else {
        std::ofstream os(out_file, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open " + out_file + " for writing");
        os << table.to_csv();
    }
    return kExitOk;
}

int cmd_gradcheck() {
    const std::vector<bgadl::GradCheckCase> cases = bgadl::run_gradcheck_suite();
    double max_err = 0.0;
    for (const auto& c : cases) {
        std::printf("%-40s %.3e\n", c.name.c_str(), c.max_rel_error);
        max_err = std::max(max_err, c.max_rel_error);
    }
    std::printf("max relative error: %.3e\n", max_err);
    return max_err < 1e-4 ? kExitOk : kExitRuntime;
}

int cmd_synth_data(const std::vector<std::string>& args) {
    std::string out_path, kind = "blobs";
    std::size_t per_class = 500, dim = 16, grid = 28;
    int classes = 4, shift = 3;
    double spread = 0.12, noise = 0.15;
    std::uint64_t seed = 7;
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string v;
        if (args[i] == "--out") {
            if (!take_value(args, i, out_path)) return usage_error("--out needs a path");
        } else if (args[i] == "--kind") {
            if (!take_value(args, i, kind)) return usage_error("--kind needs a value");
        } else if (args[i] == "--per-class") {
            if (!take_value(args, i, v)) return usage_error("--per-class needs a value");
            per_class = std::stoull(v);
        } else if (args[i] == "--classes") {
            if (!take_value(args, i, v)) return usage_error("--classes needs a value");
            classes = std::stoi(v);
        } else if (args[i] == "--dim") {
            if (!take_value(args, i, v)) return usage_error("--dim needs a value");
            dim = std::stoull(v);
        } else if (args[i] == "--spread") {
            if (!take_value(args, i, v)) return usage_error("--spread needs a value");
            spread = std::stod(v);
        } else if (args[i] == "--grid") {
            if (!take_value(args, i, v)) return usage_error("--grid needs a value");
            grid = std::stoull(v);
        } else if (args[i] == "--noise") {
            if (!take_value(args, i, v)) return usage_error("--noise needs a value");
            noise = std::stod(v);
        } else if (args[i] == "--shift") {
            if (!take_value(args, i, v)) return usage_error("--shift needs a value");
            shift = std::stoi(v);
        } else if (args[i] == "--seed") {
            if (!take_value(args, i, v)) return usage_error("--seed needs a value");
            seed = std::stoull(v);
        } else {
            return usage_error("unknown option '" + args[i] + "' for synth-data");
        }
    }
    if (out_path.empty()) return usage_error("synth-data needs --out PATH");
    bgadl::RawDataset ds;
    if (kind == "blobs")
        ds = bgadl::make_synthetic(per_class, classes, dim, spread, seed);
    else if (kind == "images")
        ds = bgadl::make_image_fixture(per_class, classes, grid, noise, shift, seed);
    else
        return usage_error("--kind must be blobs or images");
    bgadl::save_dataset(out_path, ds);
    std::cout << "wrote " << out_path << " (" << ds.count() << " samples, " << ds.meta.class_count
              << " classes, dim " << ds.meta.dim << ")\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty()) {
        print_usage(std::cerr);
        return kExitUsage;
    }
    const std::string sub = args[0];
    const std::vector<std::string> rest(args.begin() + 1, args.end());
    try {
        if (sub == "run") return cmd_run(rest);
        if (sub == "plot") return cmd_plot(rest);
        if (sub == "gradcheck") {
            if (!rest.empty()) return usage_error("gradcheck takes no options");
            return cmd_gradcheck();
        }
        if (sub == "synth-data") return cmd_synth_data(rest);
        if (sub == "--help" || sub == "-h" || sub == "help") {
            print_usage(std::cout);
            return kExitOk;
        }
        return usage_error("unknown subcommand '" + sub + "'");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
