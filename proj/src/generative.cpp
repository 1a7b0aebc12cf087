#include "bgadl/generative.hpp"

#include <cmath>

namespace bgadl {

double kl_diag_gaussian(const Tensor& mu, const Tensor& log_var) {
    require_same_shape(mu, log_var, "kl_diag_gaussian");
    require_finite(mu, "kl_diag_gaussian: mu");
    require_finite(log_var, "kl_diag_gaussian: log_var");
    double acc = 0.0;
    for (std::size_t i = 0; i < mu.data.size(); ++i) {
        const double m = mu.data[i], lv = log_var.data[i];
        acc += m * m + std::exp(lv) - 1.0 - lv;
    }
    return 0.5 * acc;
}

double reconstruction_loss(const Tensor& x_star, const Tensor& x_prime) {
    require_same_shape(x_star, x_prime, "reconstruction_loss");
    double acc = 0.0;
    for (std::size_t i = 0; i < x_star.data.size(); ++i) {
        const double d = x_star.data[i] - x_prime.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(x_star.data.size());
}

double reconstruction_distance(const Tensor& x_star, const Tensor& x_prime) {
    require_same_shape(x_star, x_prime, "reconstruction_distance");
    double acc = 0.0;
    for (std::size_t i = 0; i < x_star.data.size(); ++i) {
        const double d = x_star.data[i] - x_prime.data[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

VaeLoss vae_loss(const Tensor& x_star, const EncoderOutput& encoder_out, const Tensor& x_prime) {
    VaeLoss out;
    out.rec = reconstruction_loss(x_star, x_prime);
    out.prior = kl_diag_gaussian(encoder_out.mu, encoder_out.log_var);
    return out;
}

namespace {

double mean_neg_log(const std::vector<double>& probs) {
    double acc = 0.0;
    for (double p : probs) {
        if (!(p > 0.0 && p < 1.0))
            throw std::invalid_argument("acgan_losses: probability not strictly inside (0,1)");
        acc -= std::log(p);
    }
    return acc / static_cast<double>(probs.size());
}

double mean_neg_log_one_minus(const std::vector<double>& probs) {
    double acc = 0.0;
    for (double p : probs) {
        if (!(p > 0.0 && p < 1.0))
            throw std::invalid_argument("acgan_losses: probability not strictly inside (0,1)");
        acc -= std::log(1.0 - p);
    }
    return acc / static_cast<double>(probs.size());
}

// mean over rows of −log softmax(logits)[y−1], y 1-based
double mean_cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
    const std::size_t b = logits.rows(), c = logits.cols();
    if (labels.size() != b) throw std::invalid_argument("acgan_losses: label count mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
        const int y = labels[i];
        if (y < 1 || static_cast<std::size_t>(y) > c)
            throw std::invalid_argument("acgan_losses: label out of range");
        const double* row = &logits.data[i * c];
        double mx = row[0];
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < c; ++j) sum += std::exp(row[j] - mx);
        acc += mx + std::log(sum) - row[static_cast<std::size_t>(y - 1)];
    }
    return acc / static_cast<double>(b);
}

} // namespace

PlayerLosses acgan_losses(const std::vector<double>& d_out_real, const std::vector<double>& d_out_recon,
                          const std::vector<double>& d_out_prior, const Tensor& cls_logits_real,
                          const Tensor& cls_logits_recon, const Tensor& cls_logits_prior,
                          const std::vector<int>& y_star, const std::vector<int>& class_for_u) {
    PlayerLosses out;
    out.discriminator =
        mean_neg_log(d_out_real) + mean_neg_log_one_minus(d_out_recon) + mean_neg_log_one_minus(d_out_prior);
    out.classifier = mean_cross_entropy(cls_logits_real, y_star) + mean_cross_entropy(cls_logits_recon, y_star) +
                     mean_cross_entropy(cls_logits_prior, class_for_u);
    out.generator = mean_neg_log(d_out_recon) + mean_neg_log(d_out_prior) +
                    mean_cross_entropy(cls_logits_recon, y_star) + mean_cross_entropy(cls_logits_prior, class_for_u);
    return out;
}

namespace {

// −mean log p over the batch, p a clamped [B×1] probability column
Var mean_neg_log_v(Var p, std::size_t batch) {
    return scale(sum_all(log_v(p)), -1.0 / static_cast<double>(batch));
}

Var mean_neg_log_one_minus_v(Var p, std::size_t batch) {
    Var one_minus = add_const(scale(p, -1.0), 1.0);
    return scale(sum_all(log_v(one_minus)), -1.0 / static_cast<double>(batch));
}

std::vector<Tensor> collect_grads(Tape& t, const std::vector<Var>& leaves) {
    std::vector<Tensor> out;
    out.reserve(leaves.size());
    for (Var v : leaves) out.push_back(t.grad_of(v));
    return out;
}

std::vector<int> to_zero_based(const std::vector<int>& labels, int class_count, const char* where) {
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 1 || labels[i] > class_count)
            throw std::invalid_argument(std::string(where) + ": label out of range");
        out[i] = labels[i] - 1;
    }
    return out;
}

} // namespace

JointLossGraph build_joint_loss_graph(Tape& t, const ClassifierParams& cls_p, const EncoderParams& enc_p,
                                      const GeneratorParams& gen_p, const DiscriminatorParams& disc_p,
                                      const Tensor& x_batch, const std::vector<int>& y_batch, double gamma,
                                      std::uint64_t seed, long iteration, long step_index) {
    if (x_batch.ndim() != 2 || x_batch.rows() == 0) throw std::invalid_argument("joint loss graph: empty batch");
    const std::size_t bsz = x_batch.rows();
    if (y_batch.size() != bsz) throw std::invalid_argument("joint loss graph: label count mismatch");
    const int classes = cls_p.class_count;
    const std::size_t latent = static_cast<std::size_t>(enc_p.latent_dim);
    const double inv_b = 1.0 / static_cast<double>(bsz);

    const std::uint64_t it = static_cast<std::uint64_t>(iteration);
    const std::uint64_t st = static_cast<std::uint64_t>(step_index);

    JointLossGraph g;
    Var x = t.constant(x_batch);
    g.enc = TapedEncoder::bind(t, enc_p);
    g.gen = TapedGenerator::bind(t, gen_p);
    g.disc = TapedDiscriminator::bind(t, disc_p);
    g.cls = TapedClassifier::bind(t, cls_p);

    // encoder path: z = e(x*), x' = g(z, y*)
    g.enc_out = g.enc.forward(x, named_stream(seed, "joint_eta", it, st));
    g.x_prime = g.gen.forward(g.enc_out.z, y_batch);

    // prior path: u ~ N(0,I), uniform class
    RngStream u_stream = named_stream(seed, "joint_u", it, st);
    Tensor u({bsz, latent});
    for (double& v : u.data) v = u_stream.gaussian();
    RngStream uy_stream = named_stream(seed, "joint_uy", it, st);
    g.class_for_u.resize(bsz);
    for (int& y : g.class_for_u) y = 1 + static_cast<int>(uy_stream.below(static_cast<std::uint64_t>(classes)));
    g.x_u = g.gen.forward(t.constant(std::move(u)), g.class_for_u);

    // VAE losses (batch means)
    g.l_rec = mse_mean(x, g.x_prime);
    Var kl_terms =
        sub(add(mul(g.enc_out.mu, g.enc_out.mu), exp_v(g.enc_out.log_var)), add_const(g.enc_out.log_var, 1.0));
    g.l_prior = scale(sum_all(kl_terms), 0.5 * inv_b);

    // discriminator probabilities, clamped before any log
    Var d_real = clamp_v(sigmoid_v(g.disc.logit(x)), kProbClamp, 1.0 - kProbClamp);
    Var d_recon = clamp_v(sigmoid_v(g.disc.logit(g.x_prime)), kProbClamp, 1.0 - kProbClamp);
    Var d_prior = clamp_v(sigmoid_v(g.disc.logit(g.x_u)), kProbClamp, 1.0 - kProbClamp);

    g.disc_real = mean_neg_log_v(d_real, bsz);
    g.disc_recon_fake = mean_neg_log_one_minus_v(d_recon, bsz);
    g.disc_prior_fake = mean_neg_log_one_minus_v(d_prior, bsz);

    // classifier terms, stochastic dropout as in training
    std::vector<int> y0 = to_zero_based(y_batch, classes, "joint loss graph");
    std::vector<int> y0_u = to_zero_based(g.class_for_u, classes, "joint loss graph");
    g.cls_real = cross_entropy_mean(
        g.cls.logits(x, DropoutMode::TrainStochastic, named_stream(seed, "joint_cd", it, st, 0)), y0);
    g.cls_recon = cross_entropy_mean(
        g.cls.logits(g.x_prime, DropoutMode::TrainStochastic, named_stream(seed, "joint_cd", it, st, 1)), y0);
    g.cls_prior = cross_entropy_mean(
        g.cls.logits(g.x_u, DropoutMode::TrainStochastic, named_stream(seed, "joint_cd", it, st, 2)), y0_u);

    // player objectives
    g.enc_loss = add(g.l_rec, g.l_prior);
    g.gen_adv = add(add(mean_neg_log_v(d_recon, bsz), mean_neg_log_v(d_prior, bsz)),
                    add(g.cls_recon, g.cls_prior));
    g.gen_loss = add(scale(g.l_rec, gamma), g.gen_adv);
    g.disc_loss = add(add(g.disc_real, g.disc_recon_fake), g.disc_prior_fake);
    g.cls_loss = add(add(g.cls_real, g.cls_recon), g.cls_prior);
    return g;
}

JointStepResult joint_update_step(ParamStore& store, const Tensor& x_batch, const std::vector<int>& y_batch,
                                  double gamma, std::uint64_t seed, long iteration, long step_index) {
    const std::size_t bsz = x_batch.rows();
    const double inv_b = 1.0 / static_cast<double>(bsz);
    Tape t;
    JointLossGraph g = build_joint_loss_graph(t, store.classifier, store.encoder, store.generator,
                                              store.discriminator, x_batch, y_batch, gamma, seed, iteration,
                                              step_index);

    JointStepResult out;
    out.losses.rec = t.val(g.l_rec).data[0];
    out.losses.prior = t.val(g.l_prior).data[0];
    out.losses.disc_real = t.val(g.disc_real).data[0];
    out.losses.disc_recon_fake = t.val(g.disc_recon_fake).data[0];
    out.losses.disc_prior_fake = t.val(g.disc_prior_fake).data[0];
    out.losses.cls_real = t.val(g.cls_real).data[0];
    out.losses.cls_recon = t.val(g.cls_recon).data[0];
    out.losses.cls_prior = t.val(g.cls_prior).data[0];
    out.losses.gen_adv = t.val(g.gen_adv).data[0];
    out.losses.gamma = gamma;

    for (double v : {out.losses.rec, out.losses.prior, t.val(g.disc_loss).data[0], t.val(g.cls_loss).data[0],
                     t.val(g.gen_loss).data[0]})
        if (!std::isfinite(v)) throw std::runtime_error("joint_update_step: non-finite loss, aborting step");

    out.x_prime = t.val(g.x_prime);
    double dist_acc = 0.0;
    const std::size_t d = x_batch.cols();
    for (std::size_t i = 0; i < bsz; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = out.x_prime.data[i * d + j] - x_batch.data[i * d + j];
            acc += diff * diff;
        }
        dist_acc += std::sqrt(acc);
    }
    out.mean_recon_distance = dist_acc * inv_b;

    // all four gradients are taken at the pre-update parameters; updates are
    // then applied per player in Algorithm-1 order E → G → D → C
    t.backward(g.enc_loss);
    std::vector<Tensor> g_enc = collect_grads(t, g.enc.leaves());
    t.backward(g.gen_loss);
    std::vector<Tensor> g_gen = collect_grads(t, g.gen.leaves());
    t.backward(g.disc_loss);
    std::vector<Tensor> g_disc = collect_grads(t, g.disc.leaves());
    t.backward(g.cls_loss);
    std::vector<Tensor> g_cls = collect_grads(t, g.cls.leaves());

    optimizer_step(store.opt_encoder, params_of(store.encoder), g_enc);
    optimizer_step(store.opt_generator, params_of(store.generator), g_gen);
    optimizer_step(store.opt_discriminator, params_of(store.discriminator), g_disc);
    optimizer_step(store.opt_classifier, params_of(store.classifier), g_cls);
    return out;
}

} // namespace bgadl
