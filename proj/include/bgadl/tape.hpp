#pragma once
#include <array>
#include <functional>

#include "bgadl/tensor.hpp"

namespace bgadl {

class Tape;

// Handle to a node on a tape.
struct Var {
    Tape* tape = nullptr;
    int id = -1;
    bool valid() const { return tape != nullptr && id >= 0; }
};

// Reverse-mode tape. Nodes are appended in execution order, so the node list
// is already topologically sorted: every node's inputs precede it.
class Tape {
public:
    using GradFn = std::function<void(Tape&, int self)>;

    Var leaf(Tensor value, bool requires_grad);
    Var constant(Tensor value) { return leaf(std::move(value), false); }

    // Appends an op node. requires_grad is inherited from the inputs; fn is
    // dropped when no input needs gradients.
    Var emit(Tensor value, std::array<int, 3> inputs, GradFn fn);

    const Tensor& val(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    const Tensor& val(Var v) const { return val(v.id); }

    // Runs backpropagation from a scalar root. Gradients from any previous
    // backward() call are discarded.
    void backward(Var root);

    // ∂root/∂v after backward(); exact zeros when v is unreachable from root.
    Tensor grad_of(Var v) const;

    bool has_backward_run() const { return backward_run_; }
    bool needs_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
    int input(int id, int slot) const { return nodes_[static_cast<std::size_t>(id)].in[static_cast<std::size_t>(slot)]; }
    std::size_t size() const { return nodes_.size(); }

    // --- hooks for op backward functions ---
    // Gradient flowing into node `self`; empty tensor when none accumulated.
    const Tensor& out_grad(int self) const { return grads_[static_cast<std::size_t>(self)]; }
    // Mutable, zero-initialized gradient slot for an input node. Callers must
    // guard with needs_grad().
    Tensor& grad_slot(int id);
    // Accumulates g into id's slot if id needs gradients; no-op otherwise.
    void accumulate(int id, const Tensor& g);

private:
    struct Node {
        Tensor value;
        std::array<int, 3> in{-1, -1, -1};
        GradFn fn;
        bool requires_grad = false;
    };
    std::vector<Node> nodes_;
    std::vector<Tensor> grads_;
    bool backward_run_ = false;
};

} // namespace bgadl
