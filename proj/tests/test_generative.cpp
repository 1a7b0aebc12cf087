#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "bgadl/generative.hpp"

using namespace bgadl;

namespace {
constexpr double kLn2 = 0.6931471805599453;
constexpr double k3Ln2 = 2.0794415416798357;
constexpr double k3Ln10 = 6.907755278982138;
constexpr double kKlExp = 0.35914091422952255; // (e-2)/2

ParamStore small_store(std::uint64_t seed, std::size_t d = 8, int classes = 3) {
    ParamStore s;
    s.classifier = make_classifier(d, {12, 12}, classes, 0.5, named_stream(seed, "st_c"));
    s.encoder = make_encoder(d, 12, 4, named_stream(seed, "st_e"));
    s.generator = make_generator(classes, 4, 3, 12, d, named_stream(seed, "st_g"));
    s.discriminator = make_discriminator(d, 12, named_stream(seed, "st_d"));
    s.opt_classifier = OptimizerState::sgd_momentum(0.01, 0.9);
    s.opt_encoder = OptimizerState::adam(0.0002, 0.5, 0.999);
    s.opt_generator = OptimizerState::adam(0.0002, 0.5, 0.999);
    s.opt_discriminator = OptimizerState::adam(0.0002, 0.5, 0.999);
    return s;
}

std::vector<Tensor> snapshot(std::vector<Tensor*> params) {
    std::vector<Tensor> out;
    for (Tensor* p : params) out.push_back(*p);
    return out;
}

bool bit_identical(const std::vector<Tensor>& a, std::vector<Tensor*> b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].data.size(); ++j)
            if (a[i].data[j] != b[i]->data[j]) return false;
    return true;
}

} // namespace

TEST_CASE("kl closed-form oracles") {
    CHECK(kl_diag_gaussian(Tensor::vec({0.0}), Tensor::vec({0.0})) == 0.0);
    CHECK(kl_diag_gaussian(Tensor::vec({1.0}), Tensor::vec({0.0})) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(kl_diag_gaussian(Tensor::vec({0.0}), Tensor::vec({1.0})) == doctest::Approx(kKlExp).epsilon(1e-12));
}

TEST_CASE("kl is nonnegative and vanishes only at the prior") {
    RngStream s = named_stream(31, "kl_prop");
    for (int rep = 0; rep < 2000; ++rep) {
        Tensor mu({4});
        Tensor lv({4});
        for (double& v : mu.data) v = 3.0 * s.gaussian();
        for (double& v : lv.data) v = 2.0 * s.gaussian();
        const double kl = kl_diag_gaussian(mu, lv);
        CHECK(kl >= -1e-12);
        double norm = 0.0;
        for (double v : mu.data) norm += v * v;
        for (double v : lv.data) norm += v * v;
        if (kl < 1e-9) CHECK(norm < 1e-6); // zero KL only at mu=0, log_var=0
    }
    CHECK_THROWS_AS(kl_diag_gaussian(Tensor::vec({std::numeric_limits<double>::infinity()}),
                                     Tensor::vec({0.0})),
                    std::runtime_error);
}

TEST_CASE("reconstruction loss and distance oracles") {
    CHECK(reconstruction_loss(Tensor::vec({1.0, 2.0}), Tensor::vec({1.0, 2.0})) == 0.0);
    CHECK(reconstruction_loss(Tensor::vec({0.0, 0.0}), Tensor::vec({1.0, 1.0})) == 1.0);
    CHECK(reconstruction_distance(Tensor::vec({1.0, 2.0}), Tensor::vec({1.0, 2.0})) == 0.0);
    CHECK(reconstruction_distance(Tensor::vec({0.0, 0.0}), Tensor::vec({3.0, 4.0})) == 5.0);

    RngStream s = named_stream(32, "rec_prop");
    for (int rep = 0; rep < 500; ++rep) {
        Tensor a({6}), b({6});
        for (double& v : a.data) v = s.gaussian();
        for (double& v : b.data) v = s.gaussian();
        CHECK(reconstruction_loss(a, b) == reconstruction_loss(b, a));
        CHECK(reconstruction_distance(a, b) >= 0.0);
    }
    CHECK_THROWS_AS(reconstruction_loss(Tensor::vec({1.0}), Tensor::vec({1.0, 2.0})), std::invalid_argument);
}

TEST_CASE("vae_loss composes reconstruction and prior terms") {
    EncoderOutput eo;
    eo.mu = Tensor({3}, 0.0);
    eo.log_var = Tensor({3}, 0.0);
    eo.z = eo.mu;
    Tensor x = Tensor::vec({0.1, 0.2, 0.3});
    VaeLoss v = vae_loss(x, eo, x);
    CHECK(v.rec == 0.0);
    CHECK(v.prior == 0.0);

    RngStream s = named_stream(33, "vae_prop");
    for (int rep = 0; rep < 200; ++rep) {
        EncoderOutput r;
        r.mu = Tensor({3});
        r.log_var = Tensor({3});
        for (double& q : r.mu.data) q = s.gaussian();
        for (double& q : r.log_var.data) q = s.gaussian();
        Tensor xp({3});
        for (double& q : xp.data) q = s.uniform();
        VaeLoss vl = vae_loss(x, r, xp);
        CHECK(vl.rec >= 0.0);
        CHECK(vl.prior >= -1e-12);
    }
}

TEST_CASE("acgan loss oracles") {
    const std::size_t b = 4;
    std::vector<double> half(b, 0.5);
    Tensor uniform_logits({b, 10}, 0.0);
    std::vector<int> y(b, 3), yu(b, 7);
    PlayerLosses pl = acgan_losses(half, half, half, uniform_logits, uniform_logits, uniform_logits, y, yu);
    CHECK(pl.discriminator == doctest::Approx(k3Ln2).epsilon(1e-12));
    CHECK(pl.classifier == doctest::Approx(k3Ln10).epsilon(1e-12));
    // generator: -2 ln 0.5 + 2 ln 10
    CHECK(pl.generator == doctest::Approx(2.0 * kLn2 + 2.0 * (k3Ln10 / 3.0)).epsilon(1e-12));
}

TEST_CASE("generator loss decreases as d(x') increases") {
    const std::size_t b = 2;
    std::vector<double> half(b, 0.5);
    Tensor logits({b, 4}, 0.0);
    std::vector<int> y(b, 1), yu(b, 2);
    double prev = 1e9;
    for (double p = 0.1; p < 0.95; p += 0.1) {
        std::vector<double> d_recon(b, p);
        PlayerLosses pl = acgan_losses(half, d_recon, half, logits, logits, logits, y, yu);
        CHECK(pl.generator < prev);
        prev = pl.generator;
    }
}

TEST_CASE("acgan losses reject probabilities outside (0,1)") {
    std::vector<double> ok = {0.5};
    std::vector<double> bad = {1.0};
    Tensor logits({1, 3}, 0.0);
    std::vector<int> y = {1}, yu = {2};
    CHECK_THROWS_AS(acgan_losses(bad, ok, ok, logits, logits, logits, y, yu), std::invalid_argument);
    CHECK_THROWS_AS(acgan_losses(ok, bad, ok, logits, logits, logits, y, yu), std::invalid_argument);
}

TEST_CASE("joint step with zero learning rates reports losses but changes nothing") {
    ParamStore store = small_store(41);
    store.opt_classifier.lr = 0.0;
    store.opt_encoder.lr = 0.0;
    store.opt_generator.lr = 0.0;
    store.opt_discriminator.lr = 0.0;
    RngStream xs = named_stream(41, "x");
    Tensor x({3, 8});
    for (double& v : x.data) v = xs.uniform();
    std::vector<int> y = {1, 2, 3};

    auto before_c = snapshot(params_of(store.classifier));
    auto before_e = snapshot(params_of(store.encoder));
    auto before_g = snapshot(params_of(store.generator));
    auto before_d = snapshot(params_of(store.discriminator));

    JointStepResult r = joint_update_step(store, x, y, 0.75, 41, 1, 0);
    CHECK(bit_identical(before_c, params_of(store.classifier)));
    CHECK(bit_identical(before_e, params_of(store.encoder)));
    CHECK(bit_identical(before_g, params_of(store.generator)));
    CHECK(bit_identical(before_d, params_of(store.discriminator)));
    CHECK(std::isfinite(r.losses.rec));
    CHECK(r.losses.rec > 0.0);
    CHECK(r.losses.prior >= -1e-12);
    CHECK(std::isfinite(r.losses.disc_total()));
    CHECK(std::isfinite(r.losses.cls_total()));
    CHECK(std::isfinite(r.losses.gen_total()));
    CHECK(r.x_prime.rows() == 3);
    CHECK(r.mean_recon_distance > 0.0);
}

TEST_CASE("joint step oracles with degenerate networks") {
    ParamStore store = small_store(42, 8, 10);
    // zero-weight discriminator and classifier: d(.)=0.5 everywhere, softmax uniform
    for (Tensor* t : params_of(store.discriminator))
        for (double& v : t->data) v = 0.0;
    for (Tensor* t : params_of(store.classifier))
        for (double& v : t->data) v = 0.0;
    store.opt_classifier.lr = 0.0;
    store.opt_encoder.lr = 0.0;
    store.opt_generator.lr = 0.0;
    store.opt_discriminator.lr = 0.0;
    Tensor x({4, 8}, 0.3);
    std::vector<int> y = {1, 5, 9, 10};
    JointStepResult r = joint_update_step(store, x, y, 0.75, 42, 1, 0);
    CHECK(r.losses.disc_total() == doctest::Approx(k3Ln2).epsilon(1e-12));
    CHECK(r.losses.cls_total() == doctest::Approx(k3Ln10).epsilon(1e-12));
}

TEST_CASE("player separation: each update touches only its own group") {
    RngStream xs = named_stream(43, "x");
    Tensor x({3, 8});
    for (double& v : x.data) v = xs.uniform();
    std::vector<int> y = {1, 2, 3};

    struct Case {
        const char* name;
        int active; // 0=E 1=G 2=D 3=C
    };
    for (const Case& c : {Case{"encoder", 0}, Case{"generator", 1}, Case{"discriminator", 2},
                          Case{"classifier", 3}}) {
        ParamStore store = small_store(43);
        store.opt_encoder.lr = c.active == 0 ? 0.01 : 0.0;
        store.opt_generator.lr = c.active == 1 ? 0.01 : 0.0;
        store.opt_discriminator.lr = c.active == 2 ? 0.01 : 0.0;
        store.opt_classifier.lr = c.active == 3 ? 0.01 : 0.0;

        auto before_e = snapshot(params_of(store.encoder));
        auto before_g = snapshot(params_of(store.generator));
        auto before_d = snapshot(params_of(store.discriminator));
        auto before_c = snapshot(params_of(store.classifier));
        joint_update_step(store, x, y, 0.75, 43, 1, 0);

        INFO(c.name);
        CHECK(bit_identical(before_e, params_of(store.encoder)) == (c.active != 0));
        CHECK(bit_identical(before_g, params_of(store.generator)) == (c.active != 1));
        CHECK(bit_identical(before_d, params_of(store.discriminator)) == (c.active != 2));
        CHECK(bit_identical(before_c, params_of(store.classifier)) == (c.active != 3));
    }
}

TEST_CASE("losses stay finite under extreme parameters thanks to clamping") {
    ParamStore store = small_store(44);
    for (double& v : store.discriminator.w2.data) v *= 1e4; // saturating logits
    store.discriminator.b2 = Tensor({1}, 500.0);
    Tensor x({2, 8}, 0.5);
    std::vector<int> y = {1, 2};
    store.opt_classifier.lr = 0.0;
    store.opt_encoder.lr = 0.0;
    store.opt_generator.lr = 0.0;
    store.opt_discriminator.lr = 0.0;
    JointStepResult r = joint_update_step(store, x, y, 0.75, 44, 1, 0);
    CHECK(std::isfinite(r.losses.disc_total()));
    CHECK(std::isfinite(r.losses.gen_total()));
    CHECK(std::isfinite(r.losses.cls_total()));
}

TEST_CASE("single-sample overfit drives reconstruction down") {
    RngStream xs = named_stream(45, "x");
    Tensor x({1, 12});
    for (double& v : x.data) v = 0.15 + 0.7 * xs.uniform();
    std::vector<int> y = {2};
    double x_norm = 0.0;
    for (double v : x.data) x_norm += v * v;
    x_norm = std::sqrt(x_norm);

    SUBCASE("VAE path alone reconstructs the sample") {
        // 2000 steps on the reconstruction objective only
        EncoderParams enc = make_encoder(12, 12, 4, named_stream(45, "vp_e"));
        GeneratorParams gen = make_generator(3, 4, 3, 12, 12, named_stream(45, "vp_g"));
        OptimizerState oe = OptimizerState::adam(0.005, 0.5, 0.999);
        OptimizerState og = OptimizerState::adam(0.005, 0.5, 0.999);
        double final_rec = 0.0;
        for (int step = 0; step < 2000; ++step) {
            Tape t;
            TapedEncoder te = TapedEncoder::bind(t, enc);
            TapedGenerator tg = TapedGenerator::bind(t, gen);
            Var xv = t.constant(x);
            EncoderVars eo = te.forward(xv, named_stream(45, "vp_eta", step));
            Var xp = tg.forward(eo.z, y);
            Var l_rec = mse_mean(xv, xp);
            Var kl = scale(
                sum_all(sub(add(mul(eo.mu, eo.mu), exp_v(eo.log_var)), add_const(eo.log_var, 1.0))), 0.5);
            Var enc_loss = add(l_rec, kl);
            final_rec = t.val(l_rec).data[0];
            t.backward(enc_loss);
            std::vector<Tensor> ge;
            for (Var v : te.leaves()) ge.push_back(t.grad_of(v));
            t.backward(l_rec);
            std::vector<Tensor> gg;
            for (Var v : tg.leaves()) gg.push_back(t.grad_of(v));
            optimizer_step(oe, params_of(enc), ge);
            optimizer_step(og, params_of(gen), gg);
        }
        // Eq.(4)-style closeness of g(e(x)) to x after training
        EncoderOutput eo = encode(enc, x, named_stream(45, "vp_eval"));
        Tensor xp = generate(gen, eo.z, y);
        double diff_norm = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double diff = xp.data[i] - x.data[i];
            diff_norm += diff * diff;
        }
        CHECK(std::sqrt(diff_norm) < 0.1 * x_norm);
        CHECK(final_rec < 0.01);
    }

    SUBCASE("joint step with degenerate adversaries recovers pure VAE dynamics") {
        // zero-weight frozen D and C contribute exactly zero gradient through
        // x', so the joint update reduces to the VAE path
        ParamStore store = small_store(45, 12, 3);
        for (Tensor* t : params_of(store.discriminator))
            for (double& v : t->data) v = 0.0;
        for (Tensor* t : params_of(store.classifier))
            for (double& v : t->data) v = 0.0;
        store.opt_discriminator.lr = 0.0;
        store.opt_classifier.lr = 0.0;
        store.opt_encoder.lr = 0.005;
        store.opt_generator.lr = 0.005;
        double initial_rec = -1.0, final_rec = 0.0;
        for (int step = 0; step < 2000; ++step) {
            JointStepResult r = joint_update_step(store, x, y, 0.75, 45, 0, step);
            if (step == 0) initial_rec = r.losses.rec;
            final_rec = r.losses.rec;
        }
        CHECK(final_rec < 0.01 * initial_rec);
    }

    SUBCASE("full adversarial game still shows the reconstruction trend") {
        ParamStore store = small_store(45, 12, 3);
        store.opt_encoder.lr = 0.005;
        store.opt_generator.lr = 0.005;
        double initial_rec = -1.0, final_rec = 0.0, initial_dist = -1.0, final_dist = 0.0;
        for (int step = 0; step < 2000; ++step) {
            JointStepResult r = joint_update_step(store, x, y, 0.75, 45, 0, step);
            if (step == 0) {
                initial_rec = r.losses.rec;
                initial_dist = r.mean_recon_distance;
            }
            final_rec = r.losses.rec;
            final_dist = r.mean_recon_distance;
        }
        CHECK(final_rec < 0.25 * initial_rec);
        CHECK(final_dist < 0.5 * initial_dist);
    }
}

TEST_CASE("joint step rejects empty batches and mismatched labels") {
    ParamStore store = small_store(46);
    Tensor x({2, 8}, 0.4);
    CHECK_THROWS_AS(joint_update_step(store, x, {1}, 0.75, 46, 0, 0), std::invalid_argument);
}
