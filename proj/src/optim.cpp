#include "bgadl/optim.hpp"

#include <cmath>

namespace bgadl {

void optimizer_step(OptimizerState& state, std::vector<Tensor*> params, const std::vector<Tensor>& grads) {
    if (params.size() != grads.size()) throw std::invalid_argument("optimizer_step: param/grad count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        require_same_shape(*params[i], grads[i], "optimizer_step");
        require_finite(grads[i], "optimizer_step: gradient");
    }
    if (state.m1.empty()) {
        for (const Tensor* p : params) state.m1.push_back(Tensor(p->shape, 0.0));
        if (state.kind == OptKind::Adam)
            for (const Tensor* p : params) state.m2.push_back(Tensor(p->shape, 0.0));
    }
    if (state.m1.size() != params.size()) throw std::invalid_argument("optimizer_step: state/param count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i)
        require_same_shape(state.m1[i], *params[i], "optimizer_step: buffer");

    state.step_count += 1;
    if (state.kind == OptKind::SgdMomentum) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            Tensor& p = *params[i];
            Tensor& v = state.m1[i];
            const Tensor& g = grads[i];
            for (std::size_t j = 0; j < p.data.size(); ++j) {
                v.data[j] = state.momentum * v.data[j] + g.data[j];
                p.data[j] -= state.lr * v.data[j];
            }
        }
    } else {
        const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
        const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
        for (std::size_t i = 0; i < params.size(); ++i) {
            Tensor& p = *params[i];
            Tensor& m = state.m1[i];
            Tensor& v = state.m2[i];
            const Tensor& g = grads[i];
            for (std::size_t j = 0; j < p.data.size(); ++j) {
                m.data[j] = state.beta1 * m.data[j] + (1.0 - state.beta1) * g.data[j];
                v.data[j] = state.beta2 * v.data[j] + (1.0 - state.beta2) * g.data[j] * g.data[j];
                const double mhat = m.data[j] / bc1;
                const double vhat = v.data[j] / bc2;
                p.data[j] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
            }
        }
    }
}

} // namespace bgadl
