#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "agcrn/ops.hpp"
#include "agcrn/tensor.hpp"

namespace agcrn {

/// A named trainable tensor with an accumulated gradient of the same shape.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

  std::size_t size() const { return value.size(); }
  void zero_grad() { grad.fill(0.0); }
};

namespace ad {

/// One recorded step of the forward pass. `backprop` reads this node's
/// cotangent and accumulates into the parents' grads.
struct Node {
  Tensor value;
  Tensor grad;  // allocated only when tracked
  bool tracked = false;
  Parameter* param = nullptr;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backprop;
};

/// Handle to a node of the dynamically recorded graph. Values are eager:
/// the forward result is computed at construction; backward() replays the
/// recorded VJPs in reverse topological order.
class Value {
 public:
  Value() = default;
  explicit Value(std::shared_ptr<Node> n) : node_(std::move(n)) {}

  bool valid() const { return node_ != nullptr; }
  const Tensor& val() const { return node_->value; }
  /// Cotangent accumulated by the last backward(); tracked nodes only.
  const Tensor& grad() const { return node_->grad; }
  bool tracked() const { return node_ && node_->tracked; }
  double item() const { return node_->value.item(); }
  const Shape& shape() const { return node_->value.shape(); }

  std::shared_ptr<Node> node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Untracked node; no gradient flows into it.
Value constant(Tensor v);
/// Tracked leaf bound to a Parameter; backward() adds into p.grad.
Value leaf(Parameter& p);
/// Tracked leaf without a Parameter; read its cotangent via .grad().
Value variable(Tensor v);

Value matmul(const Value& a, const Value& b);
Value transpose(const Value& x);
Value reshape(const Value& x, Shape shape);
Value apply_unary(const Value& x, ops::Unary k);
inline Value relu(const Value& x) { return apply_unary(x, ops::Unary::relu); }
inline Value sigmoid(const Value& x) { return apply_unary(x, ops::Unary::sigmoid); }
inline Value tanh(const Value& x) { return apply_unary(x, ops::Unary::tanh); }
inline Value abs(const Value& x) { return apply_unary(x, ops::Unary::abs); }
Value softmax_rows(const Value& x);
Value pool_contract(const Value& e, const Value& w);
Value napl_combine(const Value& props, const Value& theta);
Value gcn_combine(const Value& props, const Value& theta);
Value add(const Value& a, const Value& b);
Value sub(const Value& a, const Value& b);
Value mul(const Value& a, const Value& b);
Value affine(const Value& x, double scale, double shift);
Value add_rowvec(const Value& x, const Value& v);
Value concat_cols(const Value& a, const Value& b);
Value stack_mats(std::span<const Value> mats);
/// Mean |pred - target| against a constant target.
Value l1_mean(const Value& pred, Tensor target);
/// Arithmetic mean of scalar values (single node, wide fan-in).
Value mean_of(std::span<const Value> scalars);

/// Reverse pass from a scalar root. Accumulates into Parameter::grad for
/// every reachable leaf; callers zero grads between independent passes.
void backward(const Value& root);

}  // namespace ad
}  // namespace agcrn
