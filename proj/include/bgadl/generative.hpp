#pragma once
#include <cstdint>
#include <vector>

#include "bgadl/nets.hpp"

namespace bgadl {

// Per-step losses. The acgan terms are stored as the minimized negative-log
// values, so each is >= 0 and the player losses are plain sums.
struct LossBundle {
    double rec = 0.0;
    double prior = 0.0;
    double disc_real = 0.0;
    double disc_recon_fake = 0.0;
    double disc_prior_fake = 0.0;
    double cls_real = 0.0;
    double cls_recon = 0.0;
    double cls_prior = 0.0;
    double gen_adv = 0.0;
    double gamma = 0.75;

    double disc_total() const { return disc_real + disc_recon_fake + disc_prior_fake; }
    double cls_total() const { return cls_real + cls_recon + cls_prior; }
    double gen_total() const { return gamma * rec + gen_adv; }
};

// ½ Σ (mu² + exp(log_var) − 1 − log_var): KL(N(mu, diag exp(log_var)) ‖ N(0, I))
double kl_diag_gaussian(const Tensor& mu, const Tensor& log_var);

// mean squared error over coordinates
double reconstruction_loss(const Tensor& x_star, const Tensor& x_prime);

// Euclidean norm of the difference (the Fig.-4-style diagnostic)
double reconstruction_distance(const Tensor& x_star, const Tensor& x_prime);

struct VaeLoss {
    double rec = 0.0;
    double prior = 0.0;
};
VaeLoss vae_loss(const Tensor& x_star, const EncoderOutput& encoder_out, const Tensor& x_prime);

struct PlayerLosses {
    double discriminator = 0.0; // −[log d(x*) + log(1−d(x′)) + log(1−d(g(u)))], batch mean
    double classifier = 0.0;    // −[log softmax(c(x*))_y* + log softmax(c(x′))_y* + log softmax(c(g(u)))_yu]
    double generator = 0.0;     // −[log d(x′) + log d(g(u))] + class terms (non-saturating)
};

// Batch form; d_out_* must already be clamped into (0,1).
PlayerLosses acgan_losses(const std::vector<double>& d_out_real, const std::vector<double>& d_out_recon,
                          const std::vector<double>& d_out_prior, const Tensor& cls_logits_real,
                          const Tensor& cls_logits_recon, const Tensor& cls_logits_prior,
                          const std::vector<int>& y_star, const std::vector<int>& class_for_u);

// The full Algorithm-1 loss graph on one tape; shared by joint_update_step
// and the gradient-check suite so both see identical expressions.
struct JointLossGraph {
    TapedEncoder enc;
    TapedGenerator gen;
    TapedDiscriminator disc;
    TapedClassifier cls;
    EncoderVars enc_out;
    Var x_prime, x_u;
    Var l_rec, l_prior;
    Var disc_real, disc_recon_fake, disc_prior_fake;
    Var cls_real, cls_recon, cls_prior;
    Var gen_adv;
    Var enc_loss, gen_loss, disc_loss, cls_loss;
    std::vector<int> class_for_u;
};

JointLossGraph build_joint_loss_graph(Tape& t, const ClassifierParams& cls, const EncoderParams& enc,
                                      const GeneratorParams& gen, const DiscriminatorParams& disc,
                                      const Tensor& x_batch, const std::vector<int>& y_batch, double gamma,
                                      std::uint64_t seed, long iteration, long step_index);

struct JointStepResult {
    LossBundle losses;
    Tensor x_prime;             // g(e(x*)) computed before any update, one row per batch row
    double mean_recon_distance; // mean over rows of ‖x′ − x*‖₂
};

// One Algorithm-1 update: losses evaluated at the current parameters, then
// sequential player updates E → G → D → C, each treating the other groups as
// constants. Labels are 1-based.
JointStepResult joint_update_step(ParamStore& store, const Tensor& x_batch, const std::vector<int>& y_batch,
                                  double gamma, std::uint64_t seed, long iteration, long step_index);

} // namespace bgadl
