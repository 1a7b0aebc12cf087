#include "bgadl/nets.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace bgadl {

namespace {

Tensor gaussian_matrix(std::size_t rows, std::size_t cols, double stdev, RngStream& stream) {
    Tensor t({rows, cols});
    for (double& v : t.data) v = stdev * stream.gaussian();
    return t;
}

double he_stdev(std::size_t fan_in) { return std::sqrt(2.0 / static_cast<double>(fan_in)); }

} // namespace

ClassifierParams make_classifier(std::size_t d, const std::vector<std::size_t>& hidden, int class_count,
                                 double dropout_rate, RngStream stream) {
    if (hidden.empty()) throw std::invalid_argument("make_classifier: needs at least one hidden (dropout) layer");
    if (class_count < 2) throw std::invalid_argument("make_classifier: class_count must be >= 2");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
        throw std::invalid_argument("make_classifier: dropout rate must be in [0,1)");
    ClassifierParams p;
    p.dropout_rate = dropout_rate;
    p.class_count = class_count;
    std::size_t in = d;
    for (std::size_t h : hidden) {
        p.w.push_back(gaussian_matrix(in, h, he_stdev(in), stream));
        p.b.push_back(Tensor({h}, 0.0));
        in = h;
    }
    p.w.push_back(gaussian_matrix(in, static_cast<std::size_t>(class_count), he_stdev(in), stream));
    p.b.push_back(Tensor({static_cast<std::size_t>(class_count)}, 0.0));
    return p;
}

EncoderParams make_encoder(std::size_t d, std::size_t hidden, int latent_dim, RngStream stream) {
    if (latent_dim < 1) throw std::invalid_argument("make_encoder: latent_dim must be >= 1");
    EncoderParams p;
    p.latent_dim = latent_dim;
    p.w1 = gaussian_matrix(d, hidden, he_stdev(d), stream);
    p.b1 = Tensor({hidden}, 0.0);
    const std::size_t l = static_cast<std::size_t>(latent_dim);
    p.w_mu = gaussian_matrix(hidden, l, he_stdev(hidden), stream);
    p.b_mu = Tensor({l}, 0.0);
    // small log-var head keeps exp(log_var) near 1 at init
    p.w_lv = gaussian_matrix(hidden, l, 0.01 * he_stdev(hidden), stream);
    p.b_lv = Tensor({l}, 0.0);
    return p;
}

GeneratorParams make_generator(int class_count, std::size_t latent_dim, std::size_t embed_dim,
                               std::size_t hidden, std::size_t data_dim, RngStream stream) {
    if (class_count < 2) throw std::invalid_argument("make_generator: class_count must be >= 2");
    GeneratorParams p;
    p.class_count = class_count;
    p.embed = gaussian_matrix(static_cast<std::size_t>(class_count), embed_dim, 1.0, stream);
    const std::size_t in = latent_dim + embed_dim;
    p.w1 = gaussian_matrix(in, hidden, he_stdev(in), stream);
    p.b1 = Tensor({hidden}, 0.0);
    p.w2 = gaussian_matrix(hidden, data_dim, he_stdev(hidden), stream);
    p.b2 = Tensor({data_dim}, 0.0);
    return p;
}

DiscriminatorParams make_discriminator(std::size_t d, std::size_t hidden, RngStream stream) {
    DiscriminatorParams p;
    p.w1 = gaussian_matrix(d, hidden, he_stdev(d), stream);
    p.b1 = Tensor({hidden}, 0.0);
    p.w2 = gaussian_matrix(hidden, 1, he_stdev(hidden), stream);
    p.b2 = Tensor({1}, 0.0);
    return p;
}

// --- taped bindings ---

TapedClassifier TapedClassifier::bind(Tape& t, const ClassifierParams& p) {
    TapedClassifier c;
    c.dropout_rate = p.dropout_rate;
    for (std::size_t i = 0; i < p.w.size(); ++i) {
        c.w.push_back(t.leaf(p.w[i], true));
        c.b.push_back(t.leaf(p.b[i], true));
    }
    return c;
}

Var TapedClassifier::logits(Var x, DropoutMode mode, RngStream dropout_base) const {
    Var h = x;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        h = relu_v(affine(h, w[i], b[i]));
        h = dropout(h, {dropout_rate, mode}, RngStream(derive_key(dropout_base.key, i)));
    }
    return affine(h, w.back(), b.back());
}

std::vector<Var> TapedClassifier::leaves() const {
    std::vector<Var> out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        out.push_back(w[i]);
        out.push_back(b[i]);
    }
    return out;
}

TapedEncoder TapedEncoder::bind(Tape& t, const EncoderParams& p) {
    TapedEncoder e;
    e.latent_dim = p.latent_dim;
    e.w1 = t.leaf(p.w1, true);
    e.b1 = t.leaf(p.b1, true);
    e.w_mu = t.leaf(p.w_mu, true);
    e.b_mu = t.leaf(p.b_mu, true);
    e.w_lv = t.leaf(p.w_lv, true);
    e.b_lv = t.leaf(p.b_lv, true);
    return e;
}

EncoderVars TapedEncoder::forward_with_eta(Var x, Tensor eta) const {
    Var h = relu_v(affine(x, w1, b1));
    EncoderVars out;
    out.mu = affine(h, w_mu, b_mu);
    out.log_var = affine(h, w_lv, b_lv);
    out.z = reparam_gaussian_with(out.mu, out.log_var, std::move(eta));
    return out;
}

EncoderVars TapedEncoder::forward(Var x, RngStream eta_stream) const {
    const std::size_t bsz = x.tape->val(x).rows();
    Tensor eta({bsz, static_cast<std::size_t>(latent_dim)});
    for (double& v : eta.data) v = eta_stream.gaussian();
    return forward_with_eta(x, std::move(eta));
}

std::vector<Var> TapedEncoder::leaves() const { return {w1, b1, w_mu, b_mu, w_lv, b_lv}; }

TapedGenerator TapedGenerator::bind(Tape& t, const GeneratorParams& p) {
    TapedGenerator g;
    g.class_count = p.class_count;
    g.embed = t.leaf(p.embed, true);
    g.w1 = t.leaf(p.w1, true);
    g.b1 = t.leaf(p.b1, true);
    g.w2 = t.leaf(p.w2, true);
    g.b2 = t.leaf(p.b2, true);
    return g;
}

Var TapedGenerator::forward(Var z, const std::vector<int>& labels) const {
    for (int y : labels)
        if (y < 1 || y > class_count) throw std::invalid_argument("generate: class label out of range");
    std::vector<int> labels0(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) labels0[i] = labels[i] - 1;
    Var in = concat_cols(z, embed_rows(embed, labels0));
    Var h = relu_v(affine(in, w1, b1));
    return sigmoid_v(affine(h, w2, b2));
}

std::vector<Var> TapedGenerator::leaves() const { return {embed, w1, b1, w2, b2}; }

TapedDiscriminator TapedDiscriminator::bind(Tape& t, const DiscriminatorParams& p) {
    TapedDiscriminator d;
    d.w1 = t.leaf(p.w1, true);
    d.b1 = t.leaf(p.b1, true);
    d.w2 = t.leaf(p.w2, true);
    d.b2 = t.leaf(p.b2, true);
    return d;
}

Var TapedDiscriminator::logit(Var x) const {
    Var h = relu_v(affine(x, w1, b1));
    return affine(h, w2, b2);
}

std::vector<Var> TapedDiscriminator::leaves() const { return {w1, b1, w2, b2}; }

// --- one-shot taped forwards ---

Var classifier_logits_t(Tape& t, const ClassifierParams& p, Var x, DropoutMode mode, RngStream dropout_base) {
    return TapedClassifier::bind(t, p).logits(x, mode, dropout_base);
}

EncoderVars encode_t(Tape& t, const EncoderParams& p, Var x, RngStream eta_stream) {
    return TapedEncoder::bind(t, p).forward(x, eta_stream);
}

EncoderVars encode_with_eta_t(Tape& t, const EncoderParams& p, Var x, Tensor eta) {
    return TapedEncoder::bind(t, p).forward_with_eta(x, std::move(eta));
}

Var generate_t(Tape& t, const GeneratorParams& p, Var z, const std::vector<int>& labels) {
    return TapedGenerator::bind(t, p).forward(z, labels);
}

Var discriminator_logit_t(Tape& t, const DiscriminatorParams& p, Var x) {
    return TapedDiscriminator::bind(t, p).logit(x);
}

// --- plain forwards ---

Tensor classifier_logits(const ClassifierParams& p, const Tensor& x, DropoutMode mode, RngStream dropout_base) {
    Tensor h = x;
    const std::size_t layers = p.w.size();
    for (std::size_t i = 0; i + 1 < layers; ++i) {
        h = affine_plain(h, p.w[i], p.b[i]);
        relu_inplace(h);
        h = dropout_apply(h, {p.dropout_rate, mode}, RngStream(derive_key(dropout_base.key, i)));
    }
    Tensor out = affine_plain(h, p.w.back(), p.b.back());
    require_finite(out, "classifier_logits");
    return out;
}

Tensor classifier_logits_rowstreams(const ClassifierParams& p, const Tensor& x, DropoutMode mode,
                                    const std::vector<std::uint64_t>& row_keys) {
    if (x.rows() != row_keys.size()) throw std::invalid_argument("classifier_logits_rowstreams: key per row");
    const bool active = mode != DropoutMode::DeterministicOff && p.dropout_rate > 0.0;
    const double keep_scale = 1.0 / (1.0 - p.dropout_rate);
    Tensor h = x;
    const std::size_t layers = p.w.size();
    for (std::size_t i = 0; i + 1 < layers; ++i) {
        h = affine_plain(h, p.w[i], p.b[i]);
        relu_inplace(h);
        if (active) {
            const std::size_t cols = h.cols();
            for (std::size_t r = 0; r < h.rows(); ++r) {
                RngStream s(derive_key(row_keys[r], i));
                double* row = &h.data[r * cols];
                for (std::size_t j = 0; j < cols; ++j)
                    row[j] = s.uniform() >= p.dropout_rate ? row[j] * keep_scale : 0.0;
            }
        }
    }
    Tensor out = affine_plain(h, p.w.back(), p.b.back());
    require_finite(out, "classifier_logits_rowstreams");
    return out;
}

std::vector<Tensor> draw_shared_dropout_masks(const ClassifierParams& p, RngStream& stream) {
    std::vector<Tensor> masks;
    const double keep_scale = 1.0 / (1.0 - p.dropout_rate);
    for (std::size_t i = 0; i + 1 < p.w.size(); ++i) {
        Tensor m({p.w[i].cols()});
        for (double& v : m.data)
            v = (p.dropout_rate > 0.0 && stream.uniform() < p.dropout_rate) ? 0.0 : (p.dropout_rate > 0.0 ? keep_scale : 1.0);
        masks.push_back(std::move(m));
    }
    return masks;
}

Tensor classifier_logits_shared_masks(const ClassifierParams& p, const Tensor& x,
                                      const std::vector<Tensor>& layer_masks) {
    if (layer_masks.size() + 1 != p.w.size())
        throw std::invalid_argument("classifier_logits_shared_masks: one mask per hidden layer");
    Tensor h = x;
    for (std::size_t i = 0; i + 1 < p.w.size(); ++i) {
        h = affine_plain(h, p.w[i], p.b[i]);
        relu_inplace(h);
        const Tensor& m = layer_masks[i];
        if (m.size() != h.cols()) throw std::invalid_argument("classifier_logits_shared_masks: mask width");
        for (std::size_t r = 0; r < h.rows(); ++r)
            for (std::size_t j = 0; j < h.cols(); ++j) h.data[r * h.cols() + j] *= m.data[j];
    }
    Tensor out = affine_plain(h, p.w.back(), p.b.back());
    require_finite(out, "classifier_logits_shared_masks");
    return out;
}

MCSamples mc_predict(const ClassifierParams& p, const Tensor& x, int passes, std::uint64_t stream_key) {
    if (passes < 1) throw std::invalid_argument("mc_predict: passes must be >= 1");
    if (x.ndim() != 2 || x.rows() != 1) throw std::invalid_argument("mc_predict: x must be [1×d]");
    const std::size_t c = static_cast<std::size_t>(p.class_count);
    MCSamples out;
    out.probs = Tensor({static_cast<std::size_t>(passes), c});
    for (int t = 0; t < passes; ++t) {
        Tensor logits = classifier_logits(p, x, DropoutMode::McSample,
                                          RngStream(derive_key(stream_key, static_cast<std::uint64_t>(t))));
        Tensor probs = softmax_rows(logits);
        std::copy_n(probs.data.begin(), c, out.probs.data.begin() + static_cast<std::size_t>(t) * c);
    }
    return out;
}

EncoderOutput encode_with_eta(const EncoderParams& p, const Tensor& x, const Tensor& eta) {
    Tensor h = affine_plain(x, p.w1, p.b1);
    relu_inplace(h);
    EncoderOutput out;
    out.mu = affine_plain(h, p.w_mu, p.b_mu);
    out.log_var = affine_plain(h, p.w_lv, p.b_lv);
    require_finite(out.log_var, "encode: log_var");
    require_same_shape(out.mu, eta, "encode: eta");
    out.z = out.mu;
    for (std::size_t i = 0; i < out.z.data.size(); ++i)
        out.z.data[i] += std::exp(0.5 * out.log_var.data[i]) * eta.data[i];
    require_finite(out.z, "encode: z");
    return out;
}

EncoderOutput encode(const EncoderParams& p, const Tensor& x, RngStream eta_stream) {
    Tensor eta({x.rows(), static_cast<std::size_t>(p.latent_dim)});
    for (double& v : eta.data) v = eta_stream.gaussian();
    return encode_with_eta(p, x, eta);
}

Tensor generate(const GeneratorParams& p, const Tensor& z, const std::vector<int>& labels) {
    if (z.ndim() != 2 || z.rows() != labels.size())
        throw std::invalid_argument("generate: z rows must match label count");
    for (int y : labels)
        if (y < 1 || y > p.class_count) throw std::invalid_argument("generate: class label out of range");
    const std::size_t e = p.embed.cols(), l = z.cols();
    Tensor in({z.rows(), l + e});
    for (std::size_t i = 0; i < z.rows(); ++i) {
        std::copy_n(&z.data[i * l], l, &in.data[i * (l + e)]);
        std::copy_n(&p.embed.data[(static_cast<std::size_t>(labels[i]) - 1) * e], e, &in.data[i * (l + e) + l]);
    }
    Tensor h = affine_plain(in, p.w1, p.b1);
    relu_inplace(h);
    Tensor out = affine_plain(h, p.w2, p.b2);
    sigmoid_inplace(out);
    require_finite(out, "generate");
    return out;
}

double discriminate(const DiscriminatorParams& p, const Tensor& x) {
    if (x.ndim() != 2 || x.rows() != 1) throw std::invalid_argument("discriminate: x must be [1×d]");
    Tensor h = affine_plain(x, p.w1, p.b1);
    relu_inplace(h);
    Tensor logit = affine_plain(h, p.w2, p.b2);
    double v = 1.0 / (1.0 + std::exp(-logit.data[0]));
    return std::min(1.0 - kProbClamp, std::max(kProbClamp, v));
}

// --- parameter plumbing ---

std::vector<Tensor*> params_of(ClassifierParams& p) {
    std::vector<Tensor*> out;
    for (std::size_t i = 0; i < p.w.size(); ++i) {
        out.push_back(&p.w[i]);
        out.push_back(&p.b[i]);
    }
    return out;
}

std::vector<Tensor*> params_of(EncoderParams& p) {
    return {&p.w1, &p.b1, &p.w_mu, &p.b_mu, &p.w_lv, &p.b_lv};
}

std::vector<Tensor*> params_of(GeneratorParams& p) { return {&p.embed, &p.w1, &p.b1, &p.w2, &p.b2}; }

std::vector<Tensor*> params_of(DiscriminatorParams& p) { return {&p.w1, &p.b1, &p.w2, &p.b2}; }

// --- checkpoint io ---

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint io assumes a little-endian host");

void write_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void write_u64(std::ostream& os, std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }

std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), 4)) throw std::runtime_error("checkpoint: truncated header");
    return v;
}

std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), 8)) throw std::runtime_error("checkpoint: truncated header");
    return v;
}

constexpr char kMagic[4] = {'B', 'G', 'D', 'L'};
constexpr std::uint32_t kVersion = 1;

std::vector<std::vector<Tensor*>> checkpoint_groups(ParamStore& s) {
    return {params_of(s.classifier), params_of(s.encoder), params_of(s.generator), params_of(s.discriminator)};
}

} // namespace

void save_checkpoint(const std::string& path, const ParamStore& store) {
    auto groups = checkpoint_groups(const_cast<ParamStore&>(store));
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
    os.write(kMagic, 4);
    write_u32(os, kVersion);
    for (const auto& g : groups) {
        write_u32(os, static_cast<std::uint32_t>(g.size()));
        for (const Tensor* t : g) {
            write_u32(os, static_cast<std::uint32_t>(t->shape.size()));
            for (std::size_t d : t->shape) write_u64(os, d);
        }
    }
    for (const auto& g : groups)
        for (const Tensor* t : g)
            os.write(reinterpret_cast<const char*>(t->data.data()),
                     static_cast<std::streamsize>(t->data.size() * sizeof(double)));
    if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

void load_checkpoint(const std::string& path, ParamStore& store) {
    auto groups = checkpoint_groups(store);
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("checkpoint: bad magic");
    if (read_u32(is) != kVersion) throw std::runtime_error("checkpoint: unsupported version");
    for (const auto& g : groups) {
        if (read_u32(is) != g.size()) throw std::runtime_error("checkpoint: tensor count mismatch");
        for (const Tensor* t : g) {
            const std::uint32_t nd = read_u32(is);
            if (nd != t->shape.size()) throw std::runtime_error("checkpoint: rank mismatch");
            for (std::size_t d : t->shape)
                if (read_u64(is) != d) throw std::runtime_error("checkpoint: shape mismatch");
        }
    }
    for (auto& g : groups)
        for (Tensor* t : g)
            if (!is.read(reinterpret_cast<char*>(t->data.data()),
                         static_cast<std::streamsize>(t->data.size() * sizeof(double))))
                throw std::runtime_error("checkpoint: truncated data");
}

} // namespace bgadl
