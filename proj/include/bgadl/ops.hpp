#pragma once
#include <vector>

#include "bgadl/rng.hpp"
#include "bgadl/tape.hpp"

namespace bgadl {

enum class DropoutMode { TrainStochastic, McSample, DeterministicOff };

struct DropoutSpec {
    double rate = 0.0;
    DropoutMode mode = DropoutMode::DeterministicOff;
};

// ---- taped primitives (build nodes, differentiable) ----

Var add(Var x, Var y);
Var sub(Var x, Var y);
Var mul(Var x, Var y);
Var scale(Var x, double c);
Var add_const(Var x, double c);

// y = x·W + b with x [B×N], W [N×M], b [M]
Var affine(Var x, Var w, Var b);

Var tanh_v(Var x);
Var relu_v(Var x);
Var exp_v(Var x);
Var log_v(Var x);
Var sigmoid_v(Var x);
Var clamp_v(Var x, double lo, double hi);

Var softmax_rows_v(Var x);

// mean over the batch of −log softmax(logits)[label]; labels are 0-based
Var cross_entropy_mean(Var logits, const std::vector<int>& labels0);

Var sum_all(Var x);
Var mean_all(Var x);

Var concat_cols(Var x, Var y);

// rows of `table` selected by 0-based labels; gradient scatters back
Var embed_rows(Var table, const std::vector<int>& labels0);

// inverted dropout; identity when mode is DeterministicOff or rate == 0
Var dropout(Var x, DropoutSpec spec, RngStream stream);

// z = mu + exp(log_var/2)·eta with eta drawn from `stream` (reparameterization)
Var reparam_gaussian(Var mu, Var log_var, RngStream stream);
Var reparam_gaussian_with(Var mu, Var log_var, Tensor eta);

// mean of squared elementwise difference
Var mse_mean(Var a, Var b);

// ---- tape-free counterparts (inference paths; bitwise-identical math) ----

Tensor affine_plain(const Tensor& x, const Tensor& w, const Tensor& b);
void relu_inplace(Tensor& t);
void tanh_inplace(Tensor& t);
void sigmoid_inplace(Tensor& t);
Tensor softmax_rows(const Tensor& x);
Tensor dropout_apply(const Tensor& x, DropoutSpec spec, RngStream stream);

} // namespace bgadl
