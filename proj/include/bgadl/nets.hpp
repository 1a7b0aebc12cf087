#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "bgadl/ops.hpp"
#include "bgadl/optim.hpp"
#include "bgadl/rng.hpp"
#include "bgadl/tape.hpp"

namespace bgadl {

// Probabilities fed to log terms are clamped to [kProbClamp, 1-kProbClamp].
inline constexpr double kProbClamp = 1e-7;

// Dropout MLP classifier c(x;θ_C): d → hidden... → C, ReLU hidden layers,
// inverted dropout after each hidden activation.
struct ClassifierParams {
    std::vector<Tensor> w;
    std::vector<Tensor> b;
    double dropout_rate = 0.5;
    int class_count = 0;

    std::size_t input_dim() const { return w.front().rows(); }
    std::size_t layer_count() const { return w.size(); }
};

// Encoder e(x;θ_E): d → hidden → (mu, log_var), each latent_dim wide.
struct EncoderParams {
    Tensor w1, b1;
    Tensor w_mu, b_mu;
    Tensor w_lv, b_lv;
    int latent_dim = 0;
};

// Decoder/generator g(z;θ_G): (latent ⊕ class embedding) → hidden → d,
// sigmoid output so samples stay in [0,1]^d.
struct GeneratorParams {
    Tensor embed; // class_count × embed_dim
    Tensor w1, b1;
    Tensor w2, b2;
    int class_count = 0;

    std::size_t latent_dim() const { return w1.rows() - embed.cols(); }
    std::size_t data_dim() const { return w2.cols(); }
};

// Discriminator d(x;θ_D): d → hidden → 1 logit.
struct DiscriminatorParams {
    Tensor w1, b1;
    Tensor w2, b2;
};

struct EncoderOutput {
    Tensor mu, log_var, z;
};

struct EncoderVars {
    Var mu, log_var, z;
};

// T×C matrix of per-pass softmax outputs from MC dropout.
struct MCSamples {
    Tensor probs;
    std::size_t passes() const { return probs.rows(); }
    std::size_t classes() const { return probs.cols(); }
};

ClassifierParams make_classifier(std::size_t d, const std::vector<std::size_t>& hidden, int class_count,
                                 double dropout_rate, RngStream stream);
EncoderParams make_encoder(std::size_t d, std::size_t hidden, int latent_dim, RngStream stream);
GeneratorParams make_generator(int class_count, std::size_t latent_dim, std::size_t embed_dim,
                               std::size_t hidden, std::size_t data_dim, RngStream stream);
DiscriminatorParams make_discriminator(std::size_t d, std::size_t hidden, RngStream stream);

// --- per-tape parameter bindings (leaf created once, reusable across calls) ---

struct TapedClassifier {
    std::vector<Var> w, b;
    double dropout_rate = 0.0;
    static TapedClassifier bind(Tape& t, const ClassifierParams& p);
    Var logits(Var x, DropoutMode mode, RngStream dropout_base) const;
    std::vector<Var> leaves() const; // same order as params_of
};

struct TapedEncoder {
    Var w1, b1, w_mu, b_mu, w_lv, b_lv;
    int latent_dim = 0;
    static TapedEncoder bind(Tape& t, const EncoderParams& p);
    EncoderVars forward(Var x, RngStream eta_stream) const;
    EncoderVars forward_with_eta(Var x, Tensor eta) const;
    std::vector<Var> leaves() const;
};

struct TapedGenerator {
    Var embed, w1, b1, w2, b2;
    int class_count = 0;
    static TapedGenerator bind(Tape& t, const GeneratorParams& p);
    Var forward(Var z, const std::vector<int>& labels) const; // 1-based labels
    std::vector<Var> leaves() const;
};

struct TapedDiscriminator {
    Var w1, b1, w2, b2;
    static TapedDiscriminator bind(Tape& t, const DiscriminatorParams& p);
    Var logit(Var x) const;
    std::vector<Var> leaves() const;
};

// --- one-shot taped forwards (convenience for tests and simple paths) ---

Var classifier_logits_t(Tape& t, const ClassifierParams& p, Var x, DropoutMode mode, RngStream dropout_base);
EncoderVars encode_t(Tape& t, const EncoderParams& p, Var x, RngStream eta_stream);
EncoderVars encode_with_eta_t(Tape& t, const EncoderParams& p, Var x, Tensor eta);
Var generate_t(Tape& t, const GeneratorParams& p, Var z, const std::vector<int>& labels);
Var discriminator_logit_t(Tape& t, const DiscriminatorParams& p, Var x);

// --- plain forwards (inference paths; bitwise-identical to the taped math) ---

Tensor classifier_logits(const ClassifierParams& p, const Tensor& x, DropoutMode mode, RngStream dropout_base);
// per-row dropout streams; row r of x uses streams derived from row_keys[r]
Tensor classifier_logits_rowstreams(const ClassifierParams& p, const Tensor& x, DropoutMode mode,
                                    const std::vector<std::uint64_t>& row_keys);
// one dropout mask per hidden layer shared by every row (common random numbers)
std::vector<Tensor> draw_shared_dropout_masks(const ClassifierParams& p, RngStream& stream);
Tensor classifier_logits_shared_masks(const ClassifierParams& p, const Tensor& x,
                                      const std::vector<Tensor>& layer_masks);

// T MC-dropout passes over one sample x [1×d]; pass t draws its mask from
// derive_key(stream_key, t). Rows are softmax-normalized.
MCSamples mc_predict(const ClassifierParams& p, const Tensor& x, int passes, std::uint64_t stream_key);

EncoderOutput encode(const EncoderParams& p, const Tensor& x, RngStream eta_stream);
EncoderOutput encode_with_eta(const EncoderParams& p, const Tensor& x, const Tensor& eta);
Tensor generate(const GeneratorParams& p, const Tensor& z, const std::vector<int>& labels);
// sigmoid probability clamped to [kProbClamp, 1-kProbClamp]; x is [1×d]
double discriminate(const DiscriminatorParams& p, const Tensor& x);

// --- parameter plumbing ---

std::vector<Tensor*> params_of(ClassifierParams& p);
std::vector<Tensor*> params_of(EncoderParams& p);
std::vector<Tensor*> params_of(GeneratorParams& p);
std::vector<Tensor*> params_of(DiscriminatorParams& p);

struct ParamStore {
    ClassifierParams classifier;
    EncoderParams encoder;
    GeneratorParams generator;
    DiscriminatorParams discriminator;
    OptimizerState opt_classifier;
    OptimizerState opt_encoder;
    OptimizerState opt_generator;
    OptimizerState opt_discriminator;
};

// Versioned binary checkpoint: magic "BGDL", format version, shapes manifest,
// then flat little-endian float64 arrays per group in order θ_C, θ_E, θ_G, θ_D.
void save_checkpoint(const std::string& path, const ParamStore& store);
void load_checkpoint(const std::string& path, ParamStore& store);

} // namespace bgadl
