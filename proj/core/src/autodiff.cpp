#include "agcrn/autodiff.hpp"

#include <unordered_set>
#include <utility>

namespace agcrn::ad {

namespace {

std::shared_ptr<Node> make_node(Tensor value, std::vector<std::shared_ptr<Node>> parents) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->parents = std::move(parents);
  for (const auto& p : n->parents) {
    if (p->tracked) {
      n->tracked = true;
      break;
    }
  }
  if (n->tracked) n->grad = Tensor(n->value.shape());
  return n;
}

Tensor* grad_or_null(Node* n) { return n->tracked ? &n->grad : nullptr; }

}  // namespace

Value constant(Tensor v) {
  auto n = std::make_shared<Node>();
  n->value = std::move(v);
  return Value(std::move(n));
}

Value leaf(Parameter& p) {
  auto n = std::make_shared<Node>();
  n->value = p.value;
  n->grad = Tensor(p.value.shape());
  n->tracked = true;
  n->param = &p;
  return Value(std::move(n));
}

Value variable(Tensor v) {
  auto n = std::make_shared<Node>();
  n->value = std::move(v);
  n->grad = Tensor(n->value.shape());
  n->tracked = true;
  return Value(std::move(n));
}

Value matmul(const Value& a, const Value& b) {
  auto n = make_node(ops::matmul(a.val(), b.val()), {a.node(), b.node()});
  if (n->tracked) {
    Node* pa = a.node().get();
    Node* pb = b.node().get();
    n->backprop = [pa, pb](Node& self) {
      ops::matmul_vjp(pa->value, pb->value, self.grad, grad_or_null(pa), grad_or_null(pb));
    };
  }
  return Value(std::move(n));
}

Value transpose(const Value& x) {
  auto n = make_node(ops::transpose(x.val()), {x.node()});
  if (n->tracked) {
    Node* px = x.node().get();
    n->backprop = [px](Node& self) {
      Tensor gt = ops::transpose(self.grad);
      for (std::size_t i = 0; i < gt.size(); ++i) px->grad[i] += gt[i];
    };
  }
  return Value(std::move(n));
}

Value reshape(const Value& x, Shape shape) {
  auto n = make_node(x.val().reshaped(std::move(shape)), {x.node()});
  if (n->tracked) {
    Node* px = x.node().get();
    n->backprop = [px](Node& self) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) px->grad[i] += self.grad[i];
    };
  }
  return Value(std::move(n));
}

Value apply_unary(const Value& x, ops::Unary k) {
  auto n = make_node(ops::apply_unary(x.val(), k), {x.node()});
  if (n->tracked) {
    Node* px = x.node().get();
    n->backprop = [px, k](Node& self) {
      ops::unary_vjp(px->value, self.value, k, self.grad, grad_or_null(px));
    };
  }
  return Value(std::move(n));
}

Value softmax_rows(const Value& x) {
  auto n = make_node(ops::softmax_rows(x.val()), {x.node()});
  if (n->tracked) {
    Node* px = x.node().get();
    n->backprop = [px](Node& self) {
      ops::softmax_rows_vjp(self.value, self.grad, grad_or_null(px));
    };
  }
  return Value(std::move(n));
}

Value pool_contract(const Value& e, const Value& w) {
  auto n = make_node(ops::pool_contract(e.val(), w.val()), {e.node(), w.node()});
  if (n->tracked) {
    Node* pe = e.node().get();
    Node* pw = w.node().get();
    n->backprop = [pe, pw](Node& self) {
      ops::pool_contract_vjp(pe->value, pw->value, self.grad, grad_or_null(pe), grad_or_null(pw));
    };
  }
  return Value(std::move(n));
}

Value napl_combine(const Value& props, const Value& theta) {
  auto n = make_node(ops::napl_combine(props.val(), theta.val()), {props.node(), theta.node()});
  if (n->tracked) {
    Node* pp = props.node().get();
    Node* pt = theta.node().get();
    n->backprop = [pp, pt](Node& self) {
      ops::napl_combine_vjp(pp->value, pt->value, self.grad, grad_or_null(pp), grad_or_null(pt));
    };
  }
  return Value(std::move(n));
}

Value gcn_combine(const Value& props, const Value& theta) {
  auto n = make_node(ops::gcn_combine(props.val(), theta.val()), {props.node(), theta.node()});
  if (n->tracked) {
    Node* pp = props.node().get();
    Node* pt = theta.node().get();
    n->backprop = [pp, pt](Node& self) {
      ops::gcn_combine_vjp(pp->value, pt->value, self.grad, grad_or_null(pp), grad_or_null(pt));
    };
  }
  return Value(std::move(n));
}

Value add(const Value& a, const Value& b) {
  auto n = make_node(ops::add(a.val(), b.val()), {a.node(), b.node()});
  if (n->tracked) {
    Node* pa = a.node().get();
    Node* pb = b.node().get();
    n->backprop = [pa, pb](Node& self) {
      if (pa->tracked)
        for (std::size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i];
      if (pb->tracked)
        for (std::size_t i = 0; i < self.grad.size(); ++i) pb->grad[i] += self.grad[i];
    };
  }
  return Value(std::move(n));
}

Value sub(const Value& a, const Value& b) {
  auto n = make_node(ops::sub(a.val(), b.val()), {a.node(), b.node()});
  if (n->tracked) {
    Node* pa = a.node().get();
    Node* pb = b.node().get();
    n->backprop = [pa, pb](Node& self) {
      if (pa->tracked)
        for (std::size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i];
      if (pb->tracked)
        for (std::size_t i = 0; i < self.grad.size(); ++i) pb->grad[i] -= self.grad[i];
    };
  }
  return Value(std::move(n));
}

Value mul(const Value& a, const Value& b) {
  auto n = make_node(ops::mul(a.val(), b.val()), {a.node(), b.node()});
  if (n->tracked) {
    Node* pa = a.node().get();
    Node* pb = b.node().get();
    n->backprop = [pa, pb](Node& self) {
      if (pa->tracked)
        for (std::size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i] * pb->value[i];
      if (pb->tracked)
        for (std::size_t i = 0; i < self.grad.size(); ++i) pb->grad[i] += self.grad[i] * pa->value[i];
    };
  }
  return Value(std::move(n));
}

Value affine(const Value& x, double scale, double shift) {
  auto n = make_node(ops::affine(x.val(), scale, shift), {x.node()});
  if (n->tracked) {
    Node* px = x.node().get();
    n->backprop = [px, scale](Node& self) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) px->grad[i] += scale * self.grad[i];
    };
  }
  return Value(std::move(n));
}

Value add_rowvec(const Value& x, const Value& v) {
  auto n = make_node(ops::add_rowvec(x.val(), v.val()), {x.node(), v.node()});
  if (n->tracked) {
    Node* px = x.node().get();
    Node* pv = v.node().get();
    n->backprop = [px, pv](Node& self) {
      const std::size_t m = self.grad.extent(0), cols = self.grad.extent(1);
      if (px->tracked)
        for (std::size_t i = 0; i < m * cols; ++i) px->grad[i] += self.grad[i];
      if (pv->tracked) {
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < cols; ++j) pv->grad[j] += self.grad.at(i, j);
      }
    };
  }
  return Value(std::move(n));
}

Value concat_cols(const Value& a, const Value& b) {
  auto n = make_node(ops::concat_cols(a.val(), b.val()), {a.node(), b.node()});
  if (n->tracked) {
    Node* pa = a.node().get();
    Node* pb = b.node().get();
    const std::size_t ca = a.val().extent(1);
    n->backprop = [pa, pb, ca](Node& self) {
      const std::size_t m = self.grad.extent(0), cols = self.grad.extent(1);
      const std::size_t cb = cols - ca;
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = self.grad.data() + i * cols;
        if (pa->tracked) {
          double* garow = pa->grad.data() + i * ca;
          for (std::size_t j = 0; j < ca; ++j) garow[j] += grow[j];
        }
        if (pb->tracked) {
          double* gbrow = pb->grad.data() + i * cb;
          for (std::size_t j = 0; j < cb; ++j) gbrow[j] += grow[ca + j];
        }
      }
    };
  }
  return Value(std::move(n));
}

Value stack_mats(std::span<const Value> mats) {
  std::vector<const Tensor*> tensors;
  std::vector<std::shared_ptr<Node>> parents;
  tensors.reserve(mats.size());
  parents.reserve(mats.size());
  for (const Value& v : mats) {
    tensors.push_back(&v.val());
    parents.push_back(v.node());
  }
  auto n = make_node(ops::stack_mats(tensors), std::move(parents));
  if (n->tracked) {
    n->backprop = [](Node& self) {
      const std::size_t slab = self.grad.size() / self.parents.size();
      for (std::size_t k = 0; k < self.parents.size(); ++k) {
        Node* p = self.parents[k].get();
        if (!p->tracked) continue;
        const double* src = self.grad.data() + k * slab;
        for (std::size_t i = 0; i < slab; ++i) p->grad[i] += src[i];
      }
    };
  }
  return Value(std::move(n));
}

Value l1_mean(const Value& pred, Tensor target) {
  auto n = make_node(Tensor::scalar(ops::l1_mean(pred.val(), target)), {pred.node()});
  if (n->tracked) {
    Node* pp = pred.node().get();
    auto tgt = std::make_shared<Tensor>(std::move(target));
    n->backprop = [pp, tgt](Node& self) {
      ops::l1_mean_vjp(pp->value, *tgt, self.grad[0], grad_or_null(pp));
    };
  }
  return Value(std::move(n));
}

Value mean_of(std::span<const Value> scalars) {
  if (scalars.empty()) throw ShapeError("mean_of: empty list");
  double sum = 0.0;
  std::vector<std::shared_ptr<Node>> parents;
  parents.reserve(scalars.size());
  for (const Value& v : scalars) {
    sum += v.item();
    parents.push_back(v.node());
  }
  auto n = make_node(Tensor::scalar(sum / static_cast<double>(scalars.size())), std::move(parents));
  if (n->tracked) {
    n->backprop = [](Node& self) {
      const double g = self.grad[0] / static_cast<double>(self.parents.size());
      for (const auto& p : self.parents) {
        if (p->tracked) p->grad[0] += g;
      }
    };
  }
  return Value(std::move(n));
}

void backward(const Value& root) {
  if (!root.valid()) throw Error("backward: empty value");
  if (root.val().size() != 1) {
    throw ShapeError("backward: root must be scalar, got " + shape_str(root.val().shape()));
  }
  if (!root.tracked()) return;  // nothing reaches a parameter

  // Iterative post-order DFS over tracked nodes.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  visited.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->tracked && !visited.count(p)) {
        visited.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root.node()->grad.fill(1.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backprop) n->backprop(*n);
    if (n->param) {
      for (std::size_t i = 0; i < n->grad.size(); ++i) n->param->grad[i] += n->grad[i];
    }
  }
}

}  // namespace agcrn::ad
