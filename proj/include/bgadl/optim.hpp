#pragma once
#include <vector>

#include "bgadl/tensor.hpp"

namespace bgadl {

enum class OptKind { SgdMomentum, Adam };

// One optimizer per parameter group; buffers are allocated on first step and
// must keep the parameter shapes thereafter.
struct OptimizerState {
    OptKind kind = OptKind::SgdMomentum;
    double lr = 0.0;
    double momentum = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    std::vector<Tensor> m1; // momentum (SGD) or first moment (Adam)
    std::vector<Tensor> m2; // second moment (Adam)
    long step_count = 0;

    static OptimizerState sgd_momentum(double lr, double momentum) {
        OptimizerState s;
        s.kind = OptKind::SgdMomentum;
        s.lr = lr;
        s.momentum = momentum;
        return s;
    }

    static OptimizerState adam(double lr, double beta1, double beta2, double eps = 1e-8) {
        OptimizerState s;
        s.kind = OptKind::Adam;
        s.lr = lr;
        s.beta1 = beta1;
        s.beta2 = beta2;
        s.eps = eps;
        return s;
    }
};

// In-place update of params from aligned grads. SGD: v ← μv + g, p ← p − lr·v.
// Adam: bias-corrected moment update; step counter incremented exactly once.
void optimizer_step(OptimizerState& state, std::vector<Tensor*> params, const std::vector<Tensor>& grads);

} // namespace bgadl
