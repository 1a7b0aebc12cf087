#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "bgadl/active_loop.hpp"
#include "bgadl/ops.hpp"

using namespace bgadl;

namespace {

ExperimentConfig tiny_config(Strategy strat, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.strategy = strat;
    cfg.seed = seed;
    cfg.dataset = "synthetic";
    cfg.dataset_seed = 5;
    cfg.synth_per_class = 40;
    cfg.synth_classes = 3;
    cfg.synth_dim = 6;
    cfg.synth_spread = 0.08;
    cfg.n_init_labeled = 18;
    cfg.n_test = 24;
    cfg.iterations = 3;
    cfg.k_per_iteration = 4;
    cfg.pool_subsample = 20;
    cfg.mc_passes = 5;
    cfg.latent_dim = 4;
    cfg.class_embed_dim = 3;
    cfg.hidden_dim = 12;
    cfg.pretrain_epochs = 5;
    cfg.classifier_epochs_per_iteration = 1;
    cfg.gen_epochs_per_iteration = 1;
    cfg.gen_replay = 16;
    cfg.batch_size = 10;
    cfg.measure_wall_time = false;
    return cfg;
}

std::vector<Tensor> classifier_snapshot(const ParamStore& s) {
    std::vector<Tensor> out;
    ParamStore& m = const_cast<ParamStore&>(s);
    for (Tensor* t : params_of(m.classifier)) out.push_back(*t);
    return out;
}

double mean_train_ce(const ParamStore& store, const DatasetState& state) {
    ParamStore& m = const_cast<ParamStore&>(store);
    double acc = 0.0;
    for (const LabeledExample& e : state.labeled) {
        Tensor x({1, e.x.size()});
        std::copy(e.x.data.begin(), e.x.data.end(), x.data.begin());
        Tensor logits = classifier_logits(m.classifier, x, DropoutMode::DeterministicOff, RngStream(0));
        const std::size_t c = logits.cols();
        double mx = logits.data[0];
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, logits.data[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < c; ++j) sum += std::exp(logits.data[j] - mx);
        acc += mx + std::log(sum) - logits.data[static_cast<std::size_t>(e.y - 1)];
    }
    return acc / static_cast<double>(state.labeled.size());
}

} // namespace

TEST_CASE("pretrain with zero epochs leaves parameters bit-identical") {
    ExperimentConfig cfg = tiny_config(Strategy::AlNoDa, 3);
    RawDataset raw = build_dataset(cfg);
    DatasetState state = split(raw, cfg.n_init_labeled, cfg.n_test, cfg.seed);
    ParamStore store = make_param_store(cfg, raw.meta.dim, raw.meta.class_count);
    auto before = classifier_snapshot(store);
    pretrain_classifier(store, state, 0, cfg);
    auto after = classifier_snapshot(store);
    for (std::size_t i = 0; i < before.size(); ++i)
        for (std::size_t j = 0; j < before[i].data.size(); ++j)
            CHECK(before[i].data[j] == after[i].data[j]);
}

TEST_CASE("pretraining reduces the training loss on separable blobs") {
    ExperimentConfig cfg = tiny_config(Strategy::AlNoDa, 4);
    cfg.synth_spread = 0.05;
    RawDataset raw = build_dataset(cfg);
    DatasetState state = split(raw, cfg.n_init_labeled, cfg.n_test, cfg.seed);
    ParamStore store = make_param_store(cfg, raw.meta.dim, raw.meta.class_count);
    const double before = mean_train_ce(store, state);
    pretrain_classifier(store, state, 20, cfg);
    const double after = mean_train_ce(store, state);
    CHECK(after < before);
}

TEST_CASE("pretraining is deterministic per seed") {
    ExperimentConfig cfg = tiny_config(Strategy::AlNoDa, 5);
    RawDataset raw = build_dataset(cfg);
    auto run = [&]() {
        DatasetState state = split(raw, cfg.n_init_labeled, cfg.n_test, cfg.seed);
        ParamStore store = make_param_store(cfg, raw.meta.dim, raw.meta.class_count);
        pretrain_classifier(store, state, 5, cfg);
        return classifier_snapshot(store);
    };
    auto a = run();
    auto b = run();
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].data.size(); ++j) CHECK(a[i].data[j] == b[i].data[j]);
}

TEST_CASE("pmda transform") {
    DatasetMeta meta;
    meta.grid_h = 4;
    meta.grid_w = 4;
    meta.dim = 16;
    Tensor x({16});
    for (std::size_t i = 0; i < 16; ++i) x.data[i] = static_cast<double>(i + 1);

    SUBCASE("zero shift and no flip is the identity") {
        Tensor y = pmda_transform_with(x, meta, 0, 0, false);
        for (std::size_t i = 0; i < 16; ++i) CHECK(y.data[i] == x.data[i]);
    }
    SUBCASE("output shape equals input shape") {
        RngStream s = named_stream(61, "pmda");
        Tensor y = pmda_transform(x, meta, s);
        CHECK(y.shape == x.shape);
    }
    SUBCASE("shift right then left restores interior-supported images") {
        // content only in the middle 2x2 block survives a +1/-1 round trip
        Tensor inner({16}, 0.0);
        inner.data[5] = 1.0;
        inner.data[6] = 2.0;
        inner.data[9] = 3.0;
        inner.data[10] = 4.0;
        Tensor right = pmda_transform_with(inner, meta, 1, 0, false);
        Tensor back = pmda_transform_with(right, meta, -1, 0, false);
        for (std::size_t i = 0; i < 16; ++i) CHECK(back.data[i] == inner.data[i]);
    }
    SUBCASE("horizontal flip reverses rows") {
        Tensor y = pmda_transform_with(x, meta, 0, 0, true);
        CHECK(y.data[0] == x.data[3]);
        CHECK(y.data[3] == x.data[0]);
    }
    SUBCASE("non-grid data is rejected") {
        DatasetMeta flat;
        flat.dim = 16;
        RngStream s = named_stream(61, "pmda2");
        CHECK_THROWS_AS(pmda_transform(x, flat, s), std::invalid_argument);
    }
}

TEST_CASE("bookkeeping: AL without augmentation") {
    ExperimentConfig cfg = tiny_config(Strategy::AlNoDa, 6);
    RawDataset raw = build_dataset(cfg);
    DatasetState state = split(raw, cfg.n_init_labeled, cfg.n_test, cfg.seed);
    ParamStore store = make_param_store(cfg, raw.meta.dim, raw.meta.class_count);
    pretrain_classifier(store, state, 2, cfg);
    const std::size_t labeled0 = state.labeled.size();
    const std::size_t pool0 = state.pool_live();
    IterationResult r = acquisition_iteration(state, store, cfg, 1);
    CHECK(state.labeled.size() == labeled0 + cfg.k_per_iteration);
    CHECK(state.pool_live() == pool0 - cfg.k_per_iteration);
    CHECK(state.generated_count == 0);
    CHECK(r.record.labeled_count == state.labeled.size());
    CHECK(r.record.pool_count == state.pool_live());
    CHECK(r.record.test_accuracy >= 0.0);
    CHECK(r.record.test_accuracy <= 1.0);
    CHECK(r.record.mean_acq_selected >= -1e-12);
}

TEST_CASE("bookkeeping: AL with VAE-ACGAN augmentation") {
    ExperimentConfig cfg = tiny_config(Strategy::AlVaeacgan, 7);
    RawDataset raw = build_dataset(cfg);
    DatasetState state = split(raw, cfg.n_init_labeled, cfg.n_test, cfg.seed);
    ParamStore store = make_param_store(cfg, raw.meta.dim, raw.meta.class_count);
    pretrain_classifier(store, state, 2, cfg);
    const std::size_t labeled0 = state.labeled.size();
    const std::size_t pool0 = state.pool_live();
    IterationResult r = acquisition_iteration(state, store, cfg, 1);
    CHECK(state.labeled.size() == labeled0 + 2 * cfg.k_per_iteration);
    CHECK(state.pool_live() == pool0 - cfg.k_per_iteration);
    CHECK(state.generated_count == static_cast<long>(cfg.k_per_iteration));
    CHECK(r.record.generated_count == state.generated_count);
    // augmented samples carry the oracle label of their source
    std::size_t generated_seen = 0;
    for (const LabeledExample& e : state.labeled)
        if (e.generated) {
            ++generated_seen;
            CHECK(e.y >= 1);
            CHECK(e.y <= raw.meta.class_count);
        }
    CHECK(generated_seen == cfg.k_per_iteration);
    CHECK(r.diagnostics.prop1_gaps.size() == cfg.k_per_iteration);
    CHECK(r.record.mean_recon_distance > 0.0);
    CHECK(std::isfinite(r.record.loss_gen));
}

TEST_CASE("bookkeeping: PMDA needs grid data and counts transforms as generated") {
    ExperimentConfig cfg = tiny_config(Strategy::AlPmda, 8);
    cfg.dataset = "synthetic_images";
    cfg.img_per_class = 30;
    cfg.img_classes = 3;
    cfg.img_grid = 8;
    cfg.img_noise = 0.1;
    cfg.img_shift = 2;
    RawDataset raw = build_dataset(cfg);
    DatasetState state = split(raw, cfg.n_init_labeled, cfg.n_test, cfg.seed);
    ParamStore store = make_param_store(cfg, raw.meta.dim, raw.meta.class_count);
    pretrain_classifier(store, state, 1, cfg);
    const std::size_t labeled0 = state.labeled.size();
    acquisition_iteration(state, store, cfg, 1);
    CHECK(state.labeled.size() == labeled0 + 2 * cfg.k_per_iteration);
    CHECK(state.generated_count == static_cast<long>(cfg.k_per_iteration));
}

TEST_CASE("pmda on non-grid data fails the iteration") {
    ExperimentConfig cfg = tiny_config(Strategy::AlPmda, 9);
    RawDataset raw = build_dataset(cfg); // blobs: no grid
    DatasetState state = split(raw, cfg.n_init_labeled, cfg.n_test, cfg.seed);
    ParamStore store = make_param_store(cfg, raw.meta.dim, raw.meta.class_count);
    pretrain_classifier(store, state, 1, cfg);
    CHECK_THROWS_AS(acquisition_iteration(state, store, cfg, 1), std::invalid_argument);
}

TEST_CASE("bookkeeping: BDA partial keeps the pool and refreshes generated data") {
    ExperimentConfig cfg = tiny_config(Strategy::BdaPartial, 10);
    RawDataset raw = build_dataset(cfg);
    DatasetState state = split(raw, cfg.n_init_labeled, cfg.n_test, cfg.seed);
    ParamStore store = make_param_store(cfg, raw.meta.dim, raw.meta.class_count);
    pretrain_classifier(store, state, 1, cfg);
    const std::size_t real0 = state.labeled_real_count();
    const std::size_t pool0 = state.pool_live();
    acquisition_iteration(state, store, cfg, 1);
    CHECK(state.pool_live() == pool0);
    CHECK(state.labeled_real_count() == real0);
    CHECK(state.generated_count == static_cast<long>(real0)); // 2x augmentation
    acquisition_iteration(state, store, cfg, 2);
    CHECK(state.generated_count == static_cast<long>(real0)); // refreshed, not accumulated
    CHECK(state.labeled.size() == real0 + static_cast<std::size_t>(state.generated_count));
}

TEST_CASE("pool exhaustion raises") {
    ExperimentConfig cfg = tiny_config(Strategy::AlNoDa, 11);
    cfg.synth_per_class = 16;
    cfg.n_init_labeled = 18;
    cfg.n_test = 24;
    cfg.k_per_iteration = 6;
    RawDataset raw = build_dataset(cfg);
    DatasetState state = split(raw, cfg.n_init_labeled, cfg.n_test, cfg.seed);
    ParamStore store = make_param_store(cfg, raw.meta.dim, raw.meta.class_count);
    pretrain_classifier(store, state, 1, cfg);
    // pool = 48 - 42 = 6; first iteration consumes it entirely
    acquisition_iteration(state, store, cfg, 1);
    CHECK(state.pool_live() == 0);
    CHECK_THROWS_AS(acquisition_iteration(state, store, cfg, 2), std::runtime_error);
}

TEST_CASE("run_strategy with zero iterations emits a single pretrain record") {
    ExperimentConfig cfg = tiny_config(Strategy::AlNoDa, 12);
    cfg.iterations = 0;
    RunResult r = run_strategy(cfg);
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].iteration == 0);
    CHECK(r.records[0].generated_count == 0);
    CHECK(r.records[0].test_accuracy >= 0.0);
}

TEST_CASE("run_strategy is deterministic per seed") {
    ExperimentConfig cfg = tiny_config(Strategy::AlVaeacgan, 13);
    RunResult a = run_strategy(cfg);
    RunResult b = run_strategy(cfg);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].test_accuracy == b.records[i].test_accuracy);
        CHECK(a.records[i].mean_acq_selected == b.records[i].mean_acq_selected);
        CHECK(a.records[i].mean_recon_distance == b.records[i].mean_recon_distance);
        CHECK(a.records[i].labeled_count == b.records[i].labeled_count);
    }
}

TEST_CASE("generated samples never enter the pool or the test set") {
    ExperimentConfig cfg = tiny_config(Strategy::AlVaeacgan, 14);
    RawDataset raw = build_dataset(cfg);
    DatasetState state = split(raw, cfg.n_init_labeled, cfg.n_test, cfg.seed);
    const std::size_t pool_total = state.pool.size();
    const std::size_t test_total = state.test.size();
    ParamStore store = make_param_store(cfg, raw.meta.dim, raw.meta.class_count);
    pretrain_classifier(store, state, 1, cfg);
    for (int it = 1; it <= 2; ++it) acquisition_iteration(state, store, cfg, it);
    CHECK(state.pool.size() == pool_total); // acquired items stay, flagged
    CHECK(state.test.size() == test_total);
    for (const LabeledExample& e : state.test) CHECK_FALSE(e.generated);
}

TEST_CASE("early stop cuts the run short on a plateau") {
    ExperimentConfig cfg = tiny_config(Strategy::RandomSelection, 15);
    cfg.iterations = 10;
    cfg.early_stop = true;
    cfg.early_stop_window = 2;
    cfg.early_stop_min_delta = 2.0; // impossible improvement: stop at the first check
    RunResult r = run_strategy(cfg);
    CHECK(r.records.size() < 11);
}

TEST_CASE("random selection and AL share the subsample stream") {
    ExperimentConfig cfg = tiny_config(Strategy::RandomSelection, 16);
    // the subsample indices depend only on (seed, iteration), not the strategy
    RawDataset raw = build_dataset(cfg);
    DatasetState s1 = split(raw, cfg.n_init_labeled, cfg.n_test, cfg.seed);
    DatasetState s2 = split(raw, cfg.n_init_labeled, cfg.n_test, cfg.seed);
    RngStream a = named_stream(cfg.seed, "subsample", 1);
    RngStream b = named_stream(cfg.seed, "subsample", 1);
    auto ia = subsample_pool(s1.live_pool_indices(), cfg.pool_subsample, a);
    auto ib = subsample_pool(s2.live_pool_indices(), cfg.pool_subsample, b);
    CHECK(ia == ib);
}
