// Copyright 2026 The tfscil Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal reverse-mode tape. Every forward op creates a Node holding its
// value and a closure that pushes the node's gradient into its parents.
// Graphs are rebuilt on each forward pass; parameters are long-lived leaves.

#ifndef TFSCIL_AUTODIFF_HPP_
#define TFSCIL_AUTODIFF_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tfscil/tensor.hpp"

namespace tfscil::ad {

template <typename Scalar>
struct Node {
  using Array = typename Tensor<Scalar>::Array;

  Tensor<Scalar> value;
  Array grad;  // empty until something flows into it
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(const Node&)> backward;

  Array& grad_buffer() {
    if (grad.size() != value.size()) grad = Array::Zero(value.size());
    return grad;
  }
  bool has_grad() const { return grad.size() == value.size() && grad.size() > 0; }
  void zero_grad() { grad.resize(0); }
};

template <typename Scalar>
using Var = std::shared_ptr<Node<Scalar>>;

template <typename Scalar>
Var<Scalar> constant(Tensor<Scalar> value) {
  auto n = std::make_shared<Node<Scalar>>();
  n->value = std::move(value);
  return n;
}

template <typename Scalar>
Var<Scalar> parameter(Tensor<Scalar> value) {
  auto n = constant(std::move(value));
  n->requires_grad = true;
  return n;
}

// Stop-gradient: same value, no path back to the inputs.
template <typename Scalar>
Var<Scalar> detach(const Var<Scalar>& v) {
  return constant(v->value);
}

template <typename Scalar>
Var<Scalar> make_node(Tensor<Scalar> value, std::vector<Var<Scalar>> parents,
                      std::function<void(const Node<Scalar>&)> backward) {
  auto n = std::make_shared<Node<Scalar>>();
  n->value = std::move(value);
  n->requires_grad = std::any_of(parents.begin(), parents.end(),
                                 [](const Var<Scalar>& p) { return p->requires_grad; });
  if (n->requires_grad) {
    n->parents = std::move(parents);
    n->backward = std::move(backward);
  }
  return n;
}

// Accumulates d(root)/d(leaf) into every reachable leaf that requires grad.
// The root must be a scalar.
template <typename Scalar>
void backward(const Var<Scalar>& root) {
  if (root->value.size() != 1) throw ShapeError("backward: root must be a scalar");
  if (!root->requires_grad) return;

  std::vector<Node<Scalar>*> order;
  std::unordered_set<Node<Scalar>*> seen;
  std::vector<std::pair<Node<Scalar>*, std::size_t>> stack{{root.get(), 0}};
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<Scalar>* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  root->grad_buffer().setOnes();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<Scalar>& n = **it;
    if (n.backward && n.has_grad()) n.backward(n);
  }
}

// ---------------------------------------------------------------------------
// Elementwise and reduction ops.

template <typename Scalar>
Var<Scalar> add(const Var<Scalar>& a, const Var<Scalar>& b) {
  require_shape(b->value.shape, a->value.shape, "add");
  Tensor<Scalar> out(a->value.shape, a->value.data + b->value.data);
  return make_node<Scalar>(std::move(out), {a, b}, [a, b](const Node<Scalar>& self) {
    if (a->requires_grad) a->grad_buffer() += self.grad;
    if (b->requires_grad) b->grad_buffer() += self.grad;
  });
}

template <typename Scalar>
Var<Scalar> sub(const Var<Scalar>& a, const Var<Scalar>& b) {
  require_shape(b->value.shape, a->value.shape, "sub");
  Tensor<Scalar> out(a->value.shape, a->value.data - b->value.data);
  return make_node<Scalar>(std::move(out), {a, b}, [a, b](const Node<Scalar>& self) {
    if (a->requires_grad) a->grad_buffer() += self.grad;
    if (b->requires_grad) b->grad_buffer() -= self.grad;
  });
}

template <typename Scalar>
Var<Scalar> scale(const Var<Scalar>& a, Scalar k) {
  Tensor<Scalar> out(a->value.shape, a->value.data * k);
  return make_node<Scalar>(std::move(out), {a}, [a, k](const Node<Scalar>& self) {
    a->grad_buffer() += self.grad * k;
  });
}

template <typename Scalar>
Var<Scalar> relu(const Var<Scalar>& a) {
  Tensor<Scalar> out(a->value.shape, a->value.data.max(Scalar(0)));
  return make_node<Scalar>(std::move(out), {a}, [a](const Node<Scalar>& self) {
    a->grad_buffer() += (a->value.data > Scalar(0)).select(self.grad, Scalar(0));
  });
}

template <typename Scalar>
Var<Scalar> softplus(const Var<Scalar>& a) {
  const auto& x = a->value.data;
  typename Tensor<Scalar>::Array y =
      x.max(Scalar(0)) + (Scalar(1) + (-x.abs()).exp()).log();
  Tensor<Scalar> out(a->value.shape, std::move(y));
  return make_node<Scalar>(std::move(out), {a}, [a](const Node<Scalar>& self) {
    const auto& x = a->value.data;
    a->grad_buffer() += self.grad * (Scalar(1) / (Scalar(1) + (-x).exp()));
  });
}

template <typename Scalar>
Var<Scalar> sum(const Var<Scalar>& a) {
  Tensor<Scalar> out = Tensor<Scalar>::filled({1}, a->value.data.sum());
  return make_node<Scalar>(std::move(out), {a}, [a](const Node<Scalar>& self) {
    a->grad_buffer() += self.grad[0];
  });
}

template <typename Scalar>
Var<Scalar> mean(const Var<Scalar>& a) {
  return scale(sum(a), Scalar(1) / static_cast<Scalar>(a->value.size()));
}

// Mean absolute difference. The subgradient at zero difference is zero.
template <typename Scalar>
Var<Scalar> l1_mean(const Var<Scalar>& a, const Var<Scalar>& b) {
  require_shape(b->value.shape, a->value.shape, "l1_mean");
  const Scalar inv_n = Scalar(1) / static_cast<Scalar>(a->value.size());
  Tensor<Scalar> out =
      Tensor<Scalar>::filled({1}, (a->value.data - b->value.data).abs().sum() * inv_n);
  return make_node<Scalar>(std::move(out), {a, b}, [a, b, inv_n](const Node<Scalar>& self) {
    typename Tensor<Scalar>::Array g =
        (a->value.data - b->value.data).sign() * (self.grad[0] * inv_n);
    if (a->requires_grad) a->grad_buffer() += g;
    if (b->requires_grad) b->grad_buffer() -= g;
  });
}

// Weighted sum of scalar nodes; null entries are skipped.
template <typename Scalar>
Var<Scalar> weighted_sum(const std::vector<std::pair<Var<Scalar>, Scalar>>& terms) {
  Scalar total = 0;
  std::vector<Var<Scalar>> parents;
  std::vector<Scalar> weights;
  for (const auto& [v, w] : terms) {
    if (!v) continue;
    if (v->value.size() != 1) throw ShapeError("weighted_sum: terms must be scalars");
    total += w * v->value[0];
    parents.push_back(v);
    weights.push_back(w);
  }
  auto ps = parents;
  return make_node<Scalar>(Tensor<Scalar>::filled({1}, total), std::move(parents),
                           [ps, weights](const Node<Scalar>& self) {
                             for (std::size_t i = 0; i < ps.size(); ++i) {
                               if (ps[i]->requires_grad) ps[i]->grad_buffer()[0] += weights[i] * self.grad[0];
                             }
                           });
}

// ---------------------------------------------------------------------------
// Matrix ops on rank-2 tensors.

// a (n, k) times b (m, k) transposed -> (n, m).
template <typename Scalar>
Var<Scalar> matmul_nt(const Var<Scalar>& a, const Var<Scalar>& b) {
  if (a->value.rank() != 2 || b->value.rank() != 2 || a->value.dim(1) != b->value.dim(1)) {
    throw ShapeError("matmul_nt: incompatible " + to_string(a->value.shape) + " and " +
                     to_string(b->value.shape));
  }
  Tensor<Scalar> out({a->value.dim(0), b->value.dim(0)});
  out.matrix().noalias() = a->value.matrix() * b->value.matrix().transpose();
  return make_node<Scalar>(std::move(out), {a, b}, [a, b](const Node<Scalar>& self) {
    using RowMajor = typename Tensor<Scalar>::RowMajor;
    Eigen::Map<const RowMajor> g(self.grad.data(), a->value.dim(0), b->value.dim(0));
    if (a->requires_grad) {
      Eigen::Map<RowMajor> ga(a->grad_buffer().data(), a->value.dim(0), a->value.dim(1));
      ga.noalias() += g * b->value.matrix();
    }
    if (b->requires_grad) {
      Eigen::Map<RowMajor> gb(b->grad_buffer().data(), b->value.dim(0), b->value.dim(1));
      gb.noalias() += g.transpose() * a->value.matrix();
    }
  });
}

// x (n, in) -> x W^T + bias, with W (out, in) and bias (out).
template <typename Scalar>
Var<Scalar> linear(const Var<Scalar>& x, const Var<Scalar>& weight, const Var<Scalar>& bias) {
  Var<Scalar> y = matmul_nt(x, weight);
  if (!bias) return y;
  const Index rows = y->value.dim(0), cols = y->value.dim(1);
  require_shape(bias->value.shape, {cols}, "linear bias");
  Tensor<Scalar> out = y->value;
  out.matrix().rowwise() += bias->value.data.matrix().transpose();
  return make_node<Scalar>(std::move(out), {y, bias}, [y, bias, rows, cols](const Node<Scalar>& self) {
    using RowMajor = typename Tensor<Scalar>::RowMajor;
    Eigen::Map<const RowMajor> g(self.grad.data(), rows, cols);
    if (y->requires_grad) y->grad_buffer() += self.grad;
    if (bias->requires_grad) bias->grad_buffer() += g.colwise().sum().transpose().array();
  });
}

// Scales each row of a rank-2 tensor to unit Euclidean norm. Zero rows are
// rejected since their direction is undefined.
template <typename Scalar>
Var<Scalar> normalize_rows(const Var<Scalar>& x) {
  if (x->value.rank() != 2) throw ShapeError("normalize_rows: rank-2 input required");
  const Index n = x->value.dim(0), d = x->value.dim(1);
  Eigen::Array<Scalar, Eigen::Dynamic, 1> norms = x->value.matrix().rowwise().norm().array();
  if ((norms <= Scalar(0)).any() || !norms.allFinite()) {
    throw std::domain_error("normalize_rows: zero-norm or non-finite row");
  }
  Tensor<Scalar> out = x->value;
  out.matrix().array().colwise() /= norms;
  auto yv = std::make_shared<Tensor<Scalar>>(out);
  return make_node<Scalar>(std::move(out), {x}, [x, yv, norms, n, d](const Node<Scalar>& self) {
    using RowMajor = typename Tensor<Scalar>::RowMajor;
    Eigen::Map<const RowMajor> g(self.grad.data(), n, d);
    Eigen::Map<RowMajor> gx(x->grad_buffer().data(), n, d);
    auto y = yv->matrix();
    Eigen::Array<Scalar, Eigen::Dynamic, 1> dots = (g.array() * y.array()).rowwise().sum();
    gx.array() += ((g.array() - y.array().colwise() * dots).colwise() / norms);
  });
}

// Mean softmax cross-entropy of logits (n, k) against integer labels.
template <typename Scalar>
Var<Scalar> cross_entropy(const Var<Scalar>& logits, std::vector<int> labels) {
  if (logits->value.rank() != 2 || logits->value.dim(0) != static_cast<Index>(labels.size())) {
    throw ShapeError("cross_entropy: logits/labels mismatch");
  }
  const Index n = logits->value.dim(0), k = logits->value.dim(1);
  for (int y : labels) {
    if (y < 0 || y >= k) throw std::out_of_range("cross_entropy: label outside class set");
  }
  using RowMajor = typename Tensor<Scalar>::RowMajor;
  auto probs = std::make_shared<RowMajor>(n, k);
  Scalar loss = 0;
  auto z = logits->value.matrix();
  for (Index i = 0; i < n; ++i) {
    const Scalar m = z.row(i).maxCoeff();
    probs->row(i) = (z.row(i).array() - m).exp().matrix();
    const Scalar s = probs->row(i).sum();
    probs->row(i) /= s;
    loss += -(z(i, labels[i]) - m - std::log(s));
  }
  loss /= static_cast<Scalar>(n);
  return make_node<Scalar>(Tensor<Scalar>::filled({1}, loss), {logits},
                           [logits, probs, labels, n, k](const Node<Scalar>& self) {
                             Eigen::Map<RowMajor> g(logits->grad_buffer().data(), n, k);
                             const Scalar w = self.grad[0] / static_cast<Scalar>(n);
                             for (Index i = 0; i < n; ++i) {
                               g.row(i) += w * probs->row(i);
                               g(i, labels[i]) -= w;
                             }
                           });
}

// mean + sqrt(variance) * noise, row-wise: mean (k, d), variance (k), noise (k, d).
template <typename Scalar>
Var<Scalar> reparameterize(const Var<Scalar>& mean, const Var<Scalar>& variance,
                           const Tensor<Scalar>& noise) {
  const Index k = mean->value.dim(0), d = mean->value.dim(1);
  require_shape(variance->value.shape, {k}, "reparameterize variance");
  require_shape(noise.shape, mean->value.shape, "reparameterize noise");
  if ((variance->value.data < Scalar(0)).any()) throw std::domain_error("reparameterize: negative variance");
  Eigen::Array<Scalar, Eigen::Dynamic, 1> sd = variance->value.data.sqrt();
  Tensor<Scalar> out = mean->value;
  using RowMajor = typename Tensor<Scalar>::RowMajor;
  Eigen::Map<const RowMajor> eta(noise.ptr(), k, d);
  out.matrix().array() += eta.array().colwise() * sd;
  auto eta_copy = std::make_shared<Tensor<Scalar>>(noise);
  return make_node<Scalar>(std::move(out), {mean, variance},
                           [mean, variance, sd, eta_copy, k, d](const Node<Scalar>& self) {
                             Eigen::Map<const RowMajor> g(self.grad.data(), k, d);
                             if (mean->requires_grad) mean->grad_buffer() += self.grad;
                             if (variance->requires_grad) {
                               Eigen::Map<const RowMajor> eta(eta_copy->ptr(), k, d);
                               Eigen::Array<Scalar, Eigen::Dynamic, 1> ge =
                                   (g.array() * eta.array()).rowwise().sum();
                               auto& gv = variance->grad_buffer();
                               for (Index i = 0; i < k; ++i) {
                                 if (sd[i] > Scalar(0)) gv[i] += ge[i] / (Scalar(2) * sd[i]);
                               }
                             }
                           });
}

// Rows `rows` of a rank-2 tensor, in the given order.
template <typename Scalar>
Var<Scalar> select_rows(const Var<Scalar>& x, const std::vector<Index>& rows) {
  if (x->value.rank() != 2) throw ShapeError("select_rows: need a rank-2 tensor");
  const Index d = x->value.dim(1), n = x->value.dim(0);
  Tensor<Scalar> out({static_cast<Index>(rows.size()), d});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= n) throw std::out_of_range("select_rows: row index");
    out.matrix().row(static_cast<Index>(i)) = x->value.matrix().row(rows[i]);
  }
  return make_node<Scalar>(std::move(out), {x}, [x, rows, d](const Node<Scalar>& self) {
    auto& g = x->grad_buffer();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      g.segment(rows[i] * d, d) += self.grad.segment(static_cast<Index>(i) * d, d);
    }
  });
}

}  // namespace tfscil::ad

#endif  // TFSCIL_AUTODIFF_HPP_
