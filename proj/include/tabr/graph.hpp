#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "tabr/tensor.hpp"

namespace tabr {

// Reverse-mode tape, rebuilt per forward pass (define-by-run). Nodes are
// appended in evaluation order, which is already a topological order, so the
// backward sweep is a single reverse iteration.
template <class S>
class Graph {
public:
    using Id = int32_t;

    // Pulls the node's own grad and accumulates into its parents' grads.
    using Backprop = std::function<void(Graph&, Id)>;

    Id leaf(const Tensor<S>& value, bool requires_grad) {
        return make(value, requires_grad, nullptr);
    }

    Id make(Tensor<S> value, bool requires_grad, Backprop backprop) {
        Node n;
        n.value = std::move(value);
        n.requires_grad = requires_grad;
        if (requires_grad) n.backprop = std::move(backprop);
        nodes_.push_back(std::move(n));
        return static_cast<Id>(nodes_.size() - 1);
    }

    const Tensor<S>& value(Id id) const { return nodes_[static_cast<size_t>(id)].value; }
    bool requires_grad(Id id) const { return nodes_[static_cast<size_t>(id)].requires_grad; }
    size_t size() const { return nodes_.size(); }

    // Gradient accumulator for `id`; allocates zeros on first touch.
    Tensor<S>& grad_ref(Id id) {
        Node& n = nodes_[static_cast<size_t>(id)];
        if (!n.grad.defined()) n.grad = Tensor<S>::zeros(n.value.shape());
        return n.grad;
    }

    bool has_grad(Id id) const { return nodes_[static_cast<size_t>(id)].grad.defined(); }

    // Gradient of the last backward() w.r.t. node `id`. Nodes the loss never
    // reached report zeros.
    Tensor<S> grad(Id id) const {
        const Node& n = nodes_[static_cast<size_t>(id)];
        if (!n.grad.defined()) return Tensor<S>::zeros(n.value.shape());
        return n.grad;
    }

    void backward(Id loss) {
        check(value(loss).numel() == 1, "backward: loss must be a scalar");
        if (!requires_grad(loss)) return;
        grad_ref(loss).mutable_data()[0] = S(1);
        for (Id id = loss; id >= 0; --id) {
            Node& n = nodes_[static_cast<size_t>(id)];
            if (n.requires_grad && n.grad.defined() && n.backprop) n.backprop(*this, id);
        }
    }

private:
    struct Node {
        Tensor<S> value;
        Tensor<S> grad;  // allocated lazily
        bool requires_grad = false;
        Backprop backprop;
    };

    std::vector<Node> nodes_;
};

// Accumulate `alpha * src` into `dst` (same element count).
template <class S>
inline void axpy_into(Tensor<S>& dst, const Tensor<S>& src, S alpha = S(1)) {
    S* d = dst.mutable_data();
    const S* s = src.data();
    const int64_t n = dst.numel();
    for (int64_t i = 0; i < n; ++i) d[i] += alpha * s[i];
}

}  // namespace tabr
