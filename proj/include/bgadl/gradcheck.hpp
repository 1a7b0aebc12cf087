#pragma once
#include <functional>
#include <string>
#include <vector>

#include "bgadl/tape.hpp"

namespace bgadl {

struct BuiltGraph {
    Var root;                // scalar
    std::vector<Var> leaves; // aligned with the points handed to the builder
};

// Builds a scalar graph on a fresh tape from the given points. Must be pure:
// rebuilding with the same points yields the same value (derive rng streams
// from fixed keys inside, never share mutable stream state across calls).
using GraphBuilder = std::function<BuiltGraph(Tape&, const std::vector<Tensor>&)>;

// max over all coordinates of |autodiff − central difference| / max(1, |central difference|)
double grad_check(const GraphBuilder& f, const std::vector<Tensor>& points, double fd_step);

// single-leaf convenience
double grad_check(const std::function<Var(Tape&, Var)>& f, const Tensor& point, double fd_step);

struct GradCheckCase {
    std::string name;
    double max_rel_error;
};

// Gradient suite over every primitive, the dense-layer stacks, the VAE loss
// and the three adversarial player losses; used by the CLI `gradcheck`
// subcommand and the acceptance suite.
std::vector<GradCheckCase> run_gradcheck_suite();

} // namespace bgadl
