#include "bgadl/active_loop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_map>

namespace bgadl {

namespace {

bool is_pool_strategy(Strategy s) {
    return s == Strategy::RandomSelection || s == Strategy::AlNoDa || s == Strategy::AlAcgan ||
           s == Strategy::AlVaeacgan || s == Strategy::AlPmda;
}

bool is_generative_strategy(Strategy s) {
    return s == Strategy::AlAcgan || s == Strategy::AlVaeacgan || s == Strategy::BdaPartial ||
           s == Strategy::BdaFull;
}

Tensor assemble_batch(const std::vector<const LabeledExample*>& data, const std::vector<std::size_t>& order,
                      std::size_t begin, std::size_t end, std::vector<int>& labels_out) {
    const std::size_t d = data[order[begin]]->x.size();
    Tensor x({end - begin, d});
    labels_out.clear();
    for (std::size_t i = begin; i < end; ++i) {
        const LabeledExample& e = *data[order[i]];
        if (e.x.size() != d) throw std::invalid_argument("batch: sample dimension mismatch");
        std::copy(e.x.data.begin(), e.x.data.end(), x.data.begin() + (i - begin) * d);
        labels_out.push_back(e.y);
    }
    return x;
}

void train_classifier_epochs(ParamStore& store, const std::vector<const LabeledExample*>& data, int epochs,
                             const ExperimentConfig& cfg, std::uint64_t iter_tag) {
    if (data.empty()) throw std::invalid_argument("classifier training: empty labeled set");
    if (epochs <= 0) return;
    std::vector<std::size_t> order(data.size());
    for (int ep = 0; ep < epochs; ++ep) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        RngStream shuffle = named_stream(cfg.seed, "cls_shuffle", iter_tag, static_cast<std::uint64_t>(ep));
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            std::size_t j = i + static_cast<std::size_t>(shuffle.below(order.size() - i));
            std::swap(order[i], order[j]);
        }
        std::size_t batch_index = 0;
        for (std::size_t at = 0; at < order.size(); at += cfg.batch_size, ++batch_index) {
            const std::size_t end = std::min(order.size(), at + cfg.batch_size);
            std::vector<int> labels;
            Tensor x = assemble_batch(data, order, at, end, labels);
            std::vector<int> labels0(labels.size());
            for (std::size_t i = 0; i < labels.size(); ++i) {
                if (labels[i] < 1 || labels[i] > store.classifier.class_count)
                    throw std::invalid_argument("classifier training: label out of range");
                labels0[i] = labels[i] - 1;
            }
            Tape t;
            TapedClassifier cls = TapedClassifier::bind(t, store.classifier);
            Var logits = cls.logits(t.constant(std::move(x)), DropoutMode::TrainStochastic,
                                    named_stream(cfg.seed, "cls_drop", iter_tag, static_cast<std::uint64_t>(ep),
                                                 static_cast<std::uint64_t>(batch_index)));
            Var loss = cross_entropy_mean(logits, labels0);
            t.backward(loss);
            std::vector<Tensor> grads;
            for (Var v : cls.leaves()) grads.push_back(t.grad_of(v));
            optimizer_step(store.opt_classifier, params_of(store.classifier), grads);
        }
    }
}

std::vector<const LabeledExample*> all_labeled(const DatasetState& state) {
    std::vector<const LabeledExample*> out;
    out.reserve(state.labeled.size());
    for (const LabeledExample& e : state.labeled) out.push_back(&e);
    return out;
}

std::vector<std::size_t> real_labeled_indices(const DatasetState& state) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < state.labeled.size(); ++i)
        if (!state.labeled[i].generated) out.push_back(i);
    return out;
}

struct GenTrainAccum {
    LossBundle sum;
    double recon_distance_sum = 0.0;
    long steps = 0;

    void add(const JointStepResult& r) {
        sum.rec += r.losses.rec;
        sum.prior += r.losses.prior;
        sum.disc_real += r.losses.disc_real;
        sum.disc_recon_fake += r.losses.disc_recon_fake;
        sum.disc_prior_fake += r.losses.disc_prior_fake;
        sum.cls_real += r.losses.cls_real;
        sum.cls_recon += r.losses.cls_recon;
        sum.cls_prior += r.losses.cls_prior;
        sum.gen_adv += r.losses.gen_adv;
        sum.gamma = r.losses.gamma;
        recon_distance_sum += r.mean_recon_distance;
        steps += 1;
    }

    void fill(MetricsRecord& rec) const {
        if (steps == 0) return;
        const double inv = 1.0 / static_cast<double>(steps);
        rec.mean_recon_distance = recon_distance_sum * inv;
        rec.loss_rec = sum.rec * inv;
        rec.loss_prior = sum.prior * inv;
        rec.loss_disc = (sum.disc_real + sum.disc_recon_fake + sum.disc_prior_fake) * inv;
        rec.loss_cls = (sum.cls_real + sum.cls_recon + sum.cls_prior) * inv;
        rec.loss_gen = (sum.gamma * sum.rec + sum.gen_adv) * inv;
    }
};

// One pass of VAE-ACGAN training for this iteration: replay batches of real
// labeled samples first, the acquired batch last. On the final epoch the
// x' rows produced for the acquired samples are returned (one per sample).
std::vector<Tensor> generative_training(ParamStore& store, DatasetState& state, const ExperimentConfig& cfg,
                                        int iteration, const std::vector<Tensor>& acquired_x,
                                        const std::vector<int>& acquired_y, GenTrainAccum& accum) {
    const std::uint64_t it = static_cast<std::uint64_t>(iteration);
    long step_index = 0;
    std::vector<Tensor> final_xprime(acquired_x.size());
    const std::vector<std::size_t> real_idx = real_labeled_indices(state);
    for (int ep = 0; ep < cfg.gen_epochs_per_iteration; ++ep) {
        const bool last_epoch = ep + 1 == cfg.gen_epochs_per_iteration;
        // replay of real labeled samples
        if (cfg.gen_replay > 0 && !real_idx.empty()) {
            std::vector<std::size_t> pick = real_idx;
            RngStream rs = named_stream(cfg.seed, "gen_replay", it, static_cast<std::uint64_t>(ep));
            const std::size_t take = std::min(cfg.gen_replay, pick.size());
            for (std::size_t i = 0; i < take; ++i) {
                std::size_t j = i + static_cast<std::size_t>(rs.below(pick.size() - i));
                std::swap(pick[i], pick[j]);
            }
            pick.resize(take);
            for (std::size_t at = 0; at < pick.size(); at += cfg.batch_size) {
                const std::size_t end = std::min(pick.size(), at + cfg.batch_size);
                const std::size_t d = state.meta.dim;
                Tensor x({end - at, d});
                std::vector<int> y;
                for (std::size_t i = at; i < end; ++i) {
                    const LabeledExample& e = state.labeled[pick[i]];
                    std::copy(e.x.data.begin(), e.x.data.end(), x.data.begin() + (i - at) * d);
                    y.push_back(e.y);
                }
                accum.add(joint_update_step(store, x, y, cfg.gamma, cfg.seed, iteration, step_index++));
            }
        }
        // acquired batch last, so the recorded x' comes from the most-trained generator
        if (!acquired_x.empty()) {
            for (std::size_t at = 0; at < acquired_x.size(); at += cfg.batch_size) {
                const std::size_t end = std::min(acquired_x.size(), at + cfg.batch_size);
                const std::size_t d = state.meta.dim;
                Tensor x({end - at, d});
                std::vector<int> y;
                for (std::size_t i = at; i < end; ++i) {
                    std::copy(acquired_x[i].data.begin(), acquired_x[i].data.end(), x.data.begin() + (i - at) * d);
                    y.push_back(acquired_y[i]);
                }
                JointStepResult r = joint_update_step(store, x, y, cfg.gamma, cfg.seed, iteration, step_index++);
                if (last_epoch)
                    for (std::size_t i = at; i < end; ++i) {
                        Tensor row({d});
                        std::copy_n(r.x_prime.data.begin() + (i - at) * d, d, row.data.begin());
                        final_xprime[i] = std::move(row);
                    }
                accum.add(r);
            }
        }
    }
    return final_xprime;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

namespace {

RawDataset limit_dataset(RawDataset ds, std::size_t limit, std::uint64_t dataset_seed) {
    if (limit == 0 || limit >= ds.count()) return ds;
    std::vector<std::size_t> order(ds.count());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    RngStream s = named_stream(dataset_seed, "dataset_limit");
    for (std::size_t i = 0; i < limit; ++i) {
        std::size_t j = i + static_cast<std::size_t>(s.below(order.size() - i));
        std::swap(order[i], order[j]);
    }
    RawDataset out;
    out.meta = ds.meta;
    out.images.reserve(limit);
    out.labels.reserve(limit);
    for (std::size_t i = 0; i < limit; ++i) {
        out.images.push_back(std::move(ds.images[order[i]]));
        out.labels.push_back(ds.labels[order[i]]);
    }
    return out;
}

} // namespace

RawDataset build_dataset(const ExperimentConfig& cfg) {
    RawDataset ds;
    if (cfg.dataset == "synthetic")
        ds = make_synthetic(cfg.synth_per_class, cfg.synth_classes, cfg.synth_dim, cfg.synth_spread,
                            cfg.dataset_seed);
    else if (cfg.dataset == "synthetic_images")
        ds = make_image_fixture(cfg.img_per_class, cfg.img_classes, cfg.img_grid, cfg.img_noise,
                                cfg.img_shift, cfg.dataset_seed);
    else if (cfg.dataset == "idx")
        ds = load_idx_dataset(cfg.idx_images, cfg.idx_labels);
    else if (cfg.dataset == "container")
        ds = load_dataset(cfg.container_path);
    else
        throw std::invalid_argument("build_dataset: unknown dataset kind '" + cfg.dataset + "'");
    return limit_dataset(std::move(ds), cfg.dataset_limit, cfg.dataset_seed);
}

ParamStore make_param_store(const ExperimentConfig& cfg, std::size_t data_dim, int class_count) {
    ParamStore s;
    const std::size_t h = cfg.hidden_dim;
    s.classifier = make_classifier(data_dim, {h, h}, class_count, cfg.dropout_rate,
                                   named_stream(cfg.seed, "init_c"));
    s.encoder = make_encoder(data_dim, h, cfg.latent_dim, named_stream(cfg.seed, "init_e"));
    s.generator = make_generator(class_count, static_cast<std::size_t>(cfg.latent_dim),
                                 static_cast<std::size_t>(cfg.class_embed_dim), h, data_dim,
                                 named_stream(cfg.seed, "init_g"));
    s.discriminator = make_discriminator(data_dim, h, named_stream(cfg.seed, "init_d"));
    s.opt_classifier = OptimizerState::sgd_momentum(cfg.sgd_lr, cfg.sgd_momentum);
    s.opt_encoder = OptimizerState::adam(cfg.adam_lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
    s.opt_generator = OptimizerState::adam(cfg.adam_lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
    s.opt_discriminator = OptimizerState::adam(cfg.adam_lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
    return s;
}

void pretrain_classifier(ParamStore& store, const DatasetState& state, int epochs, const ExperimentConfig& cfg) {
    if (state.labeled.empty()) throw std::invalid_argument("pretrain_classifier: empty labeled set");
    train_classifier_epochs(store, all_labeled(state), epochs, cfg, 0);
}

double evaluate_accuracy(const ClassifierParams& cls, const std::vector<LabeledExample>& test) {
    if (test.empty()) throw std::invalid_argument("evaluate_accuracy: empty test set");
    const std::size_t d = cls.input_dim();
    constexpr std::size_t kBatch = 256;
    std::size_t correct = 0;
    for (std::size_t at = 0; at < test.size(); at += kBatch) {
        const std::size_t end = std::min(test.size(), at + kBatch);
        Tensor x({end - at, d});
        for (std::size_t i = at; i < end; ++i)
            std::copy(test[i].x.data.begin(), test[i].x.data.end(), x.data.begin() + (i - at) * d);
        Tensor logits = classifier_logits(cls, x, DropoutMode::DeterministicOff, RngStream(0));
        const std::size_t c = logits.cols();
        for (std::size_t i = at; i < end; ++i) {
            const double* row = &logits.data[(i - at) * c];
            std::size_t best = 0;
            for (std::size_t j = 1; j < c; ++j)
                if (row[j] > row[best]) best = j;
            if (static_cast<int>(best) + 1 == test[i].y) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

Tensor pmda_transform_with(const Tensor& x, const DatasetMeta& meta, int dx, int dy, bool flip) {
    if (meta.grid_h == 0 || meta.grid_w == 0)
        throw std::invalid_argument("pmda_transform: dataset has no grid shape");
    if (x.size() != meta.grid_h * meta.grid_w)
        throw std::invalid_argument("pmda_transform: sample does not match grid");
    const long h = static_cast<long>(meta.grid_h), w = static_cast<long>(meta.grid_w);
    Tensor out(x.shape, 0.0);
    for (long r = 0; r < h; ++r)
        for (long c = 0; c < w; ++c) {
            long sc = flip ? (w - 1 - c) : c;
            const long from_r = r - dy;
            const long from_c = sc - dx;
            if (from_r >= 0 && from_r < h && from_c >= 0 && from_c < w)
                out.data[static_cast<std::size_t>(r * w + c)] =
                    x.data[static_cast<std::size_t>(from_r * w + from_c)];
        }
    return out;
}

Tensor pmda_transform(const Tensor& x, const DatasetMeta& meta, RngStream& stream) {
    if (meta.grid_h == 0 || meta.grid_w == 0)
        throw std::invalid_argument("pmda_transform: dataset has no grid shape");
    const int dx = static_cast<int>(stream.below(5)) - 2;
    const int dy = static_cast<int>(stream.below(5)) - 2;
    const bool flip = meta.flip_safe && stream.uniform() < 0.5;
    return pmda_transform_with(x, meta, dx, dy, flip);
}

IterationResult acquisition_iteration(DatasetState& state, ParamStore& store, const ExperimentConfig& cfg,
                                      int iteration) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t it = static_cast<std::uint64_t>(iteration);
    const Strategy strat = cfg.strategy;

    const std::size_t labeled_before = state.labeled.size();
    const long generated_before = state.generated_count;
    const std::size_t pool_before = state.pool_live();
    const std::size_t real_before = state.labeled_real_count();

    IterationResult out;
    out.record.iteration = iteration;
    GenTrainAccum gen_accum;
    std::size_t k_eff = 0;

    if (is_pool_strategy(strat)) {
        const std::vector<std::size_t> live = state.live_pool_indices();
        if (live.empty()) throw std::runtime_error("acquisition_iteration: pool exhausted");
        RngStream sub_stream = named_stream(cfg.seed, "subsample", it);
        const std::vector<std::size_t> sub = subsample_pool(live, cfg.pool_subsample, sub_stream);

        std::vector<double> scores;
        if (strat == Strategy::RandomSelection) {
            RngStream rstream = named_stream(cfg.seed, "random_scores", it);
            scores.resize(sub.size());
            for (double& s : scores) s = rstream.uniform();
        } else {
            auto item = [&state](std::size_t i) -> const Tensor& { return state.pool[i].x; };
            scores = score_pool(store.classifier, item, sub, cfg.mc_passes, cfg.seed,
                                iteration, cfg.workers);
        }
        const std::vector<std::size_t> selected = select_top_k(scores, sub, cfg.k_per_iteration);
        k_eff = selected.size();
        const ScoreStats stats = score_stats(scores);
        out.diagnostics.score_iqr = stats.iqr;

        std::unordered_map<std::size_t, double> score_of;
        score_of.reserve(sub.size());
        for (std::size_t i = 0; i < sub.size(); ++i) score_of[sub[i]] = scores[i];
        double sel_score_sum = 0.0;
        for (std::size_t idx : selected) sel_score_sum += score_of.at(idx);
        out.record.mean_acq_selected = k_eff > 0 ? sel_score_sum / static_cast<double>(k_eff) : 0.0;

        // oracle labels the selected samples; they join the labeled set
        std::vector<Tensor> acquired_x;
        std::vector<int> acquired_y;
        acquired_x.reserve(k_eff);
        for (std::size_t idx : selected) {
            const int y = state.oracle_label(idx);
            acquired_x.push_back(state.pool[idx].x);
            acquired_y.push_back(y);
        }
        for (std::size_t i = 0; i < acquired_x.size(); ++i)
            state.labeled.push_back({acquired_x[i], acquired_y[i], false});

        // augmentation per strategy
        std::vector<Tensor> augmented;
        if (strat == Strategy::AlPmda) {
            for (std::size_t i = 0; i < acquired_x.size(); ++i) {
                RngStream s = named_stream(cfg.seed, "pmda", it, static_cast<std::uint64_t>(i));
                augmented.push_back(pmda_transform(acquired_x[i], state.meta, s));
            }
        } else if (strat == Strategy::AlVaeacgan || strat == Strategy::AlAcgan) {
            std::vector<Tensor> xprime =
                generative_training(store, state, cfg, iteration, acquired_x, acquired_y, gen_accum);
            if (strat == Strategy::AlVaeacgan) {
                augmented = std::move(xprime);
            } else {
                // BDA-style augmentation: g(u, y*) with u from the prior
                RngStream us = named_stream(cfg.seed, "acgan_u", it);
                Tensor u({acquired_x.size(), static_cast<std::size_t>(cfg.latent_dim)});
                for (double& v : u.data) v = us.gaussian();
                Tensor rows = generate(store.generator, u, acquired_y);
                const std::size_t d = state.meta.dim;
                for (std::size_t i = 0; i < acquired_x.size(); ++i) {
                    Tensor row({d});
                    std::copy_n(rows.data.begin() + i * d, d, row.data.begin());
                    augmented.push_back(std::move(row));
                }
            }
        }
        if (!augmented.empty()) {
            for (std::size_t i = 0; i < augmented.size(); ++i)
                state.labeled.push_back({augmented[i], acquired_y[i], true});
            state.generated_count += static_cast<long>(augmented.size());

            // CRN acquisition values of the augmented samples (Fig. 5 / Prop. 1)
            double aprime_sum = 0.0;
            for (std::size_t i = 0; i < augmented.size(); ++i) {
                const std::uint64_t key = named_key(cfg.seed, "prop1", it, static_cast<std::uint64_t>(i));
                Prop1Result r =
                    proposition1_gap(store.classifier, acquired_x[i], augmented[i], cfg.mc_passes, key);
                out.diagnostics.prop1_gaps.push_back(r.gap);
                aprime_sum += r.a_prime;
            }
            out.diagnostics.median_prop1_gap = median_of(out.diagnostics.prop1_gaps);
            out.record.mean_acq_generated = aprime_sum / static_cast<double>(augmented.size());
        }
    } else {
        // BDA strategies: no acquisition; refresh the generated augmentation set
        const int factor = strat == Strategy::BdaPartial ? 2 : 10;
        const std::vector<std::size_t> real_idx = real_labeled_indices(state);
        if (real_idx.empty()) throw std::runtime_error("acquisition_iteration: no real labeled data");

        // train the VAE-ACGAN on real labeled samples
        long step_index = 0;
        for (int ep = 0; ep < cfg.gen_epochs_per_iteration; ++ep) {
            std::vector<std::size_t> pick = real_idx;
            RngStream rs = named_stream(cfg.seed, "bda_gen", it, static_cast<std::uint64_t>(ep));
            const std::size_t take = std::min(std::max(cfg.gen_replay, cfg.batch_size), pick.size());
            for (std::size_t i = 0; i < take; ++i) {
                std::size_t j = i + static_cast<std::size_t>(rs.below(pick.size() - i));
                std::swap(pick[i], pick[j]);
            }
            pick.resize(take);
            for (std::size_t at = 0; at < pick.size(); at += cfg.batch_size) {
                const std::size_t end = std::min(pick.size(), at + cfg.batch_size);
                const std::size_t d = state.meta.dim;
                Tensor x({end - at, d});
                std::vector<int> y;
                for (std::size_t i = at; i < end; ++i) {
                    const LabeledExample& e = state.labeled[pick[i]];
                    std::copy(e.x.data.begin(), e.x.data.end(), x.data.begin() + (i - at) * d);
                    y.push_back(e.y);
                }
                gen_accum.add(joint_update_step(store, x, y, cfg.gamma, cfg.seed, iteration, step_index++));
            }
        }

        // replace the generated part of the labeled set with fresh samples
        std::vector<LabeledExample> real_only;
        for (const LabeledExample& e : state.labeled)
            if (!e.generated) real_only.push_back(e);
        state.labeled = std::move(real_only);
        const std::size_t target = std::min<std::size_t>(
            static_cast<std::size_t>(factor - 1) * state.labeled.size(), cfg.bda_generated_cap);
        RngStream us = named_stream(cfg.seed, "bda_u", it);
        RngStream ys = named_stream(cfg.seed, "bda_y", it);
        const std::size_t d = state.meta.dim;
        for (std::size_t at = 0; at < target; at += cfg.batch_size) {
            const std::size_t bsz = std::min(cfg.batch_size, target - at);
            Tensor u({bsz, static_cast<std::size_t>(cfg.latent_dim)});
            for (double& v : u.data) v = us.gaussian();
            std::vector<int> y(bsz);
            for (int& yy : y)
                yy = 1 + static_cast<int>(ys.below(static_cast<std::uint64_t>(state.meta.class_count)));
            Tensor rows = generate(store.generator, u, y);
            for (std::size_t i = 0; i < bsz; ++i) {
                Tensor row({d});
                std::copy_n(rows.data.begin() + i * d, d, row.data.begin());
                state.labeled.push_back({std::move(row), y[i], true});
            }
        }
        state.generated_count = static_cast<long>(target);
    }

    // classifier training on the grown labeled set
    if (cfg.reinit_classifier_each_iteration) {
        store.classifier = make_classifier(state.meta.dim, {cfg.hidden_dim, cfg.hidden_dim},
                                           state.meta.class_count, cfg.dropout_rate,
                                           named_stream(cfg.seed, "reinit_c", it));
        store.opt_classifier = OptimizerState::sgd_momentum(cfg.sgd_lr, cfg.sgd_momentum);
    }
    train_classifier_epochs(store, all_labeled(state), cfg.classifier_epochs_per_iteration, cfg, it);

    // bookkeeping invariants per strategy
    const std::size_t labeled_after = state.labeled.size();
    const long generated_after = state.generated_count;
    const std::size_t pool_after = state.pool_live();
    bool ok = true;
    if (strat == Strategy::RandomSelection || strat == Strategy::AlNoDa) {
        ok = labeled_after == labeled_before + k_eff && generated_after == generated_before &&
             pool_after == pool_before - k_eff;
    } else if (strat == Strategy::AlVaeacgan || strat == Strategy::AlAcgan || strat == Strategy::AlPmda) {
        ok = labeled_after == labeled_before + 2 * k_eff &&
             generated_after == generated_before + static_cast<long>(k_eff) &&
             pool_after == pool_before - k_eff;
    } else {
        ok = pool_after == pool_before && state.labeled_real_count() == real_before &&
             labeled_after == real_before + static_cast<std::size_t>(generated_after);
    }
    if (!ok) throw std::logic_error("acquisition_iteration: bookkeeping invariant violated");

    gen_accum.fill(out.record);
    out.record.labeled_count = labeled_after;
    out.record.generated_count = generated_after;
    out.record.pool_count = pool_after;
    out.record.test_accuracy = evaluate_accuracy(store.classifier, state.test);
    if (cfg.measure_wall_time)
        out.record.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

RunResult run_strategy(const ExperimentConfig& cfg, const RecordObserver& on_record) {
    validate_config(cfg);
    if (is_generative_strategy(cfg.strategy) && cfg.gen_epochs_per_iteration < 1)
        throw std::invalid_argument("run_strategy: generative strategies need gen_epochs_per_iteration >= 1");

    RawDataset raw = build_dataset(cfg);
    std::size_t n_init = cfg.n_init_labeled;
    if (cfg.strategy == Strategy::BdaFull) n_init = raw.count() - cfg.n_test; // full training set labeled
    DatasetState state = split(raw, n_init, cfg.n_test, cfg.seed, true);

    RunResult out;
    out.params = make_param_store(cfg, raw.meta.dim, raw.meta.class_count);

    const auto t0 = std::chrono::steady_clock::now();
    pretrain_classifier(out.params, state, cfg.pretrain_epochs, cfg);
    MetricsRecord rec0;
    rec0.iteration = 0;
    rec0.labeled_count = state.labeled.size();
    rec0.generated_count = state.generated_count;
    rec0.pool_count = state.pool_live();
    rec0.test_accuracy = evaluate_accuracy(out.params.classifier, state.test);
    if (cfg.measure_wall_time)
        rec0.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.records.push_back(rec0);
    out.diagnostics.push_back({});
    if (on_record) on_record(rec0);

    for (int iter = 1; iter <= cfg.iterations; ++iter) {
        IterationResult r = acquisition_iteration(state, out.params, cfg, iter);
        out.records.push_back(r.record);
        out.diagnostics.push_back(std::move(r.diagnostics));
        if (on_record) on_record(out.records.back());
        if (cfg.early_stop && static_cast<int>(out.records.size()) > cfg.early_stop_window + 1) {
            const std::size_t n = out.records.size();
            double best_prev = 0.0;
            for (std::size_t i = n - 1 - static_cast<std::size_t>(cfg.early_stop_window); i + 1 < n; ++i)
                best_prev = std::max(best_prev, out.records[i].test_accuracy);
            if (out.records.back().test_accuracy - best_prev < cfg.early_stop_min_delta) break;
        }
    }
    return out;
}

} // namespace bgadl
