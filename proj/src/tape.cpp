#include "bgadl/tape.hpp"

namespace bgadl {

Var Tape::leaf(Tensor value, bool requires_grad) {
    require_finite(value, "Tape::leaf");
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::emit(Tensor value, std::array<int, 3> inputs, GradFn fn) {
    require_finite(value, "Tape::emit");
    Node n;
    n.value = std::move(value);
    n.in = inputs;
    for (int id : inputs) {
        if (id < 0) continue;
        if (id >= static_cast<int>(nodes_.size())) throw std::logic_error("Tape::emit: input from the future");
        if (nodes_[static_cast<std::size_t>(id)].requires_grad) n.requires_grad = true;
    }
    if (n.requires_grad) n.fn = std::move(fn);
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::backward(Var root) {
    if (root.tape != this || !root.valid()) throw std::invalid_argument("backward: root not on this tape");
    const Node& r = nodes_[static_cast<std::size_t>(root.id)];
    if (r.value.size() != 1) throw std::invalid_argument("backward: root must be scalar");

    grads_.assign(nodes_.size(), Tensor{});

    // reachability through input edges, pruned at nodes that need no grad
    std::vector<char> reached(nodes_.size(), 0);
    std::vector<int> stack{root.id};
    reached[static_cast<std::size_t>(root.id)] = 1;
    while (!stack.empty()) {
        int id = stack.back();
        stack.pop_back();
        for (int in : nodes_[static_cast<std::size_t>(id)].in) {
            if (in < 0 || reached[static_cast<std::size_t>(in)]) continue;
            if (!nodes_[static_cast<std::size_t>(in)].requires_grad) continue;
            reached[static_cast<std::size_t>(in)] = 1;
            stack.push_back(in);
        }
    }

    grads_[static_cast<std::size_t>(root.id)] = Tensor(r.value.shape, 1.0);
    for (int id = root.id; id >= 0; --id) {
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        if (!reached[static_cast<std::size_t>(id)] || !n.fn) continue;
        if (grads_[static_cast<std::size_t>(id)].data.empty()) continue;
        n.fn(*this, id);
    }
    backward_run_ = true;
}

Tensor Tape::grad_of(Var v) const {
    if (v.tape != this || !v.valid()) throw std::invalid_argument("grad_of: var not on this tape");
    if (!backward_run_) throw std::logic_error("grad_of: backward() has not been run");
    const Tensor& g = grads_[static_cast<std::size_t>(v.id)];
    if (g.data.empty()) return Tensor(nodes_[static_cast<std::size_t>(v.id)].value.shape, 0.0);
    return g;
}

Tensor& Tape::grad_slot(int id) {
    Tensor& g = grads_[static_cast<std::size_t>(id)];
    if (g.data.empty()) g = Tensor(nodes_[static_cast<std::size_t>(id)].value.shape, 0.0);
    return g;
}

void Tape::accumulate(int id, const Tensor& g) {
    if (!needs_grad(id)) return;
    Tensor& slot = grad_slot(id);
    require_same_shape(slot, g, "Tape::accumulate");
    for (std::size_t i = 0; i < slot.data.size(); ++i) slot.data[i] += g.data[i];
}

} // namespace bgadl
