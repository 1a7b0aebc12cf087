#pragma once
#include <cstdint>
#include <string>

namespace bgadl {

enum class Strategy {
    RandomSelection,
    AlNoDa,
    AlAcgan,
    AlVaeacgan,
    BdaPartial,
    BdaFull,
    AlPmda,
};

Strategy strategy_from_string(const std::string& s);
std::string to_string(Strategy s);

// Flat key=value experiment configuration. Defaults follow the training
// protocol (batch 100, SGD lr 0.01 momentum 0.9 for the classifier, Adam
// lr 2e-4 β1 0.5 β2 0.999 for encoder/generator/discriminator, γ 0.75) at
// desk-scale sizes.
struct ExperimentConfig {
    Strategy strategy = Strategy::AlVaeacgan;
    std::uint64_t seed = 1;

    std::string dataset = "synthetic"; // synthetic | synthetic_images | idx | container
    std::uint64_t dataset_seed = 7;
    std::size_t synth_per_class = 1500;
    int synth_classes = 4;
    std::size_t synth_dim = 16;
    double synth_spread = 0.12;
    std::size_t img_per_class = 1220;
    int img_classes = 10;
    std::size_t img_grid = 28;
    double img_noise = 0.15;
    int img_shift = 3;
    std::string idx_images;
    std::string idx_labels;
    std::string container_path;
    // when nonzero, the loaded dataset is first subsampled to this many
    // examples (uniform, deterministic per dataset_seed)
    std::size_t dataset_limit = 0;

    std::size_t n_init_labeled = 200;
    std::size_t n_test = 1000;
    int iterations = 20;
    std::size_t k_per_iteration = 50;
    std::size_t pool_subsample = 1000;
    int mc_passes = 25;

    double gamma = 0.75;
    int latent_dim = 32;
    int class_embed_dim = 16;
    std::size_t hidden_dim = 256;
    double dropout_rate = 0.5;

    int pretrain_epochs = 20;
    int classifier_epochs_per_iteration = 2;
    bool reinit_classifier_each_iteration = false;
    int gen_epochs_per_iteration = 4;
    std::size_t gen_replay = 256;
    std::size_t batch_size = 100;
    std::size_t bda_generated_cap = 10000;

    double sgd_lr = 0.01;
    double sgd_momentum = 0.9;
    double adam_lr = 0.0002;
    double adam_beta1 = 0.5;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    bool early_stop = false;
    int early_stop_window = 5;
    double early_stop_min_delta = 0.001;

    int workers = 1;
    bool measure_wall_time = true;
};

// Parses a UTF-8 key=value file ('#' comments). Unknown keys and out-of-range
// values are errors; parse errors carry the line number. The BGADL_SEED
// environment variable, when set, overrides the configured seed.
ExperimentConfig load_config(const std::string& path);

// Applies one key=value pair (shared by the file parser and tests).
void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value);

void validate_config(const ExperimentConfig& cfg);

} // namespace bgadl
