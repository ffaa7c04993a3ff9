#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "fluhost/nn/tensor.hpp"

namespace fluhost::nn {

struct Node {
    Tensor value;
    Tensor grad;  // empty until first accumulation
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    // Reads this node's grad and accumulates into the parents' grads.
    std::function<void(Node&)> backward;

    // Zero-filled grad of the value's shape, allocated on demand.
    Tensor& grad_buffer();
};

// Handle to a node of the dynamic computation graph. Copies share the node.
class Var {
public:
    Var() = default;

    static Var constant(Tensor value);
    static Var parameter(Tensor value);

    // Result node; keeps parents and backward only if some parent needs grads.
    static Var from_op(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward);

    const Tensor& value() const { return node_->value; }
    Tensor& mutable_value() { return node_->value; }
    const Shape& shape() const { return node_->value.shape(); }
    bool requires_grad() const { return node_->requires_grad; }

    // Empty tensor if no gradient reached this node.
    const Tensor& grad() const { return node_->grad; }
    void zero_grad();

    // Seeds d(this)/d(this) = 1 for a single-element value and propagates.
    void backward();

    Node* node() const { return node_.get(); }

private:
    explicit Var(std::shared_ptr<Node> n) : node_(std::move(n)) {}
    std::shared_ptr<Node> node_;
};

}  // namespace fluhost::nn
