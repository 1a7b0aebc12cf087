#include "bgadl/config.hpp"

#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace bgadl {

Strategy strategy_from_string(const std::string& s) {
    if (s == "random") return Strategy::RandomSelection;
    if (s == "al_no_da") return Strategy::AlNoDa;
    if (s == "al_acgan") return Strategy::AlAcgan;
    if (s == "al_vaeacgan") return Strategy::AlVaeacgan;
    if (s == "bda_partial") return Strategy::BdaPartial;
    if (s == "bda_full") return Strategy::BdaFull;
    if (s == "al_pmda") return Strategy::AlPmda;
    throw std::invalid_argument("unknown strategy '" + s + "'");
}

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::RandomSelection: return "random";
        case Strategy::AlNoDa: return "al_no_da";
        case Strategy::AlAcgan: return "al_acgan";
        case Strategy::AlVaeacgan: return "al_vaeacgan";
        case Strategy::BdaPartial: return "bda_partial";
        case Strategy::BdaFull: return "bda_full";
        case Strategy::AlPmda: return "al_pmda";
    }
    throw std::logic_error("to_string: bad strategy");
}

namespace {

std::uint64_t parse_u64(const std::string& v) {
    std::size_t pos = 0;
    const unsigned long long r = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("not an integer: '" + v + "'");
    return static_cast<std::uint64_t>(r);
}

std::size_t parse_size(const std::string& v) { return static_cast<std::size_t>(parse_u64(v)); }

int parse_int(const std::string& v) {
    std::size_t pos = 0;
    const int r = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("not an integer: '" + v + "'");
    return r;
}

double parse_double(const std::string& v) {
    std::size_t pos = 0;
    const double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("not a number: '" + v + "'");
    return r;
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument("not a boolean: '" + v + "'");
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "strategy") cfg.strategy = strategy_from_string(value);
    else if (key == "seed") cfg.seed = parse_u64(value);
    else if (key == "dataset") cfg.dataset = value;
    else if (key == "dataset_seed") cfg.dataset_seed = parse_u64(value);
    else if (key == "synth_per_class") cfg.synth_per_class = parse_size(value);
    else if (key == "synth_classes") cfg.synth_classes = parse_int(value);
    else if (key == "synth_dim") cfg.synth_dim = parse_size(value);
    else if (key == "synth_spread") cfg.synth_spread = parse_double(value);
    else if (key == "img_per_class") cfg.img_per_class = parse_size(value);
    else if (key == "img_classes") cfg.img_classes = parse_int(value);
    else if (key == "img_grid") cfg.img_grid = parse_size(value);
    else if (key == "img_noise") cfg.img_noise = parse_double(value);
    else if (key == "img_shift") cfg.img_shift = parse_int(value);
    else if (key == "idx_images") cfg.idx_images = value;
    else if (key == "idx_labels") cfg.idx_labels = value;
    else if (key == "container_path") cfg.container_path = value;
    else if (key == "dataset_limit") cfg.dataset_limit = parse_size(value);
    else if (key == "n_init_labeled") cfg.n_init_labeled = parse_size(value);
    else if (key == "n_test") cfg.n_test = parse_size(value);
    else if (key == "iterations") cfg.iterations = parse_int(value);
    else if (key == "k_per_iteration") cfg.k_per_iteration = parse_size(value);
    else if (key == "pool_subsample") cfg.pool_subsample = parse_size(value);
    else if (key == "mc_passes") cfg.mc_passes = parse_int(value);
    else if (key == "gamma") cfg.gamma = parse_double(value);
    else if (key == "latent_dim") cfg.latent_dim = parse_int(value);
    else if (key == "class_embed_dim") cfg.class_embed_dim = parse_int(value);
    else if (key == "hidden_dim") cfg.hidden_dim = parse_size(value);
    else if (key == "dropout_rate") cfg.dropout_rate = parse_double(value);
    else if (key == "pretrain_epochs") cfg.pretrain_epochs = parse_int(value);
    else if (key == "classifier_epochs_per_iteration") cfg.classifier_epochs_per_iteration = parse_int(value);
    else if (key == "reinit_classifier_each_iteration") cfg.reinit_classifier_each_iteration = parse_bool(value);
    else if (key == "gen_epochs_per_iteration") cfg.gen_epochs_per_iteration = parse_int(value);
    else if (key == "gen_replay") cfg.gen_replay = parse_size(value);
    else if (key == "batch_size") cfg.batch_size = parse_size(value);
    else if (key == "bda_generated_cap") cfg.bda_generated_cap = parse_size(value);
    else if (key == "sgd_lr") cfg.sgd_lr = parse_double(value);
    else if (key == "sgd_momentum") cfg.sgd_momentum = parse_double(value);
    else if (key == "adam_lr") cfg.adam_lr = parse_double(value);
    else if (key == "adam_beta1") cfg.adam_beta1 = parse_double(value);
    else if (key == "adam_beta2") cfg.adam_beta2 = parse_double(value);
    else if (key == "adam_eps") cfg.adam_eps = parse_double(value);
    else if (key == "early_stop") cfg.early_stop = parse_bool(value);
    else if (key == "early_stop_window") cfg.early_stop_window = parse_int(value);
    else if (key == "early_stop_min_delta") cfg.early_stop_min_delta = parse_double(value);
    else if (key == "workers") cfg.workers = parse_int(value);
    else if (key == "measure_wall_time") cfg.measure_wall_time = parse_bool(value);
    else throw std::invalid_argument("unknown config key '" + key + "'");
}

void validate_config(const ExperimentConfig& cfg) {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
    if (cfg.dataset != "synthetic" && cfg.dataset != "synthetic_images" && cfg.dataset != "idx" &&
        cfg.dataset != "container")
        fail("dataset must be one of synthetic|synthetic_images|idx|container");
    if (cfg.dataset == "idx" && (cfg.idx_images.empty() || cfg.idx_labels.empty()))
        fail("idx dataset needs idx_images and idx_labels");
    if (cfg.dataset == "container" && cfg.container_path.empty()) fail("container dataset needs container_path");
    if (cfg.n_init_labeled < 1) fail("n_init_labeled must be positive");
    if (cfg.n_test < 1) fail("n_test must be positive");
    if (cfg.iterations < 0) fail("iterations must be >= 0");
    if (cfg.k_per_iteration < 1) fail("k_per_iteration must be positive");
    if (cfg.pool_subsample < 1) fail("pool_subsample must be positive");
    if (cfg.mc_passes < 1) fail("mc_passes (T) must be >= 1");
    if (cfg.gamma < 0.0) fail("gamma must be >= 0");
    if (cfg.latent_dim < 1) fail("latent_dim must be positive");
    if (cfg.class_embed_dim < 1) fail("class_embed_dim must be positive");
    if (cfg.hidden_dim < 1) fail("hidden_dim must be positive");
    if (!(cfg.dropout_rate >= 0.0 && cfg.dropout_rate < 1.0)) fail("dropout_rate must be in [0,1)");
    if (cfg.pretrain_epochs < 0) fail("pretrain_epochs must be >= 0");
    if (cfg.classifier_epochs_per_iteration < 0) fail("classifier_epochs_per_iteration must be >= 0");
    if (cfg.gen_epochs_per_iteration < 0) fail("gen_epochs_per_iteration must be >= 0");
    if (cfg.batch_size < 1) fail("batch_size must be positive");
    if (cfg.workers < 1) fail("workers must be >= 1");
    if (cfg.early_stop_window < 1) fail("early_stop_window must be >= 1");
    if (cfg.synth_classes < 2 || cfg.img_classes < 2) fail("class counts must be >= 2");
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config: cannot open " + path);
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: " + path + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            apply_config_entry(cfg, key, value);
        } catch (const std::exception& e) {
            throw std::runtime_error("config: " + path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (const char* env_seed = std::getenv("BGADL_SEED")) {
        try {
            cfg.seed = parse_u64(env_seed);
        } catch (const std::exception&) {
            throw std::runtime_error("config: BGADL_SEED is not an integer");
        }
    }
    validate_config(cfg);
    return cfg;
}

} // namespace bgadl
