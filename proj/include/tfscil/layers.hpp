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

#ifndef TFSCIL_LAYERS_HPP_
#define TFSCIL_LAYERS_HPP_

#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tfscil/autodiff.hpp"

namespace tfscil {

// Named parameters and buffers of one network, with an architecture
// descriptor. Tensors are exchanged with checkpoints as 32-bit floats.
struct StateDict {
  std::map<std::string, std::string> descriptor;
  std::vector<std::pair<std::string, Tensor<float>>> tensors;

  const Tensor<float>* find(const std::string& name) const {
    for (const auto& [n, t] : tensors) {
      if (n == name) return &t;
    }
    return nullptr;
  }
};

template <typename Scalar>
class NetState {
 public:
  using VarT = ad::Var<Scalar>;

  VarT add_param(const std::string& name, Tensor<Scalar> init) {
    auto v = ad::parameter(std::move(init));
    params_.emplace_back(name, v);
    return v;
  }
  std::shared_ptr<Tensor<Scalar>> add_buffer(const std::string& name, Tensor<Scalar> init) {
    auto b = std::make_shared<Tensor<Scalar>>(std::move(init));
    buffers_.emplace_back(name, b);
    return b;
  }

  const std::vector<std::pair<std::string, VarT>>& params() const { return params_; }
  const std::vector<std::pair<std::string, std::shared_ptr<Tensor<Scalar>>>>& buffers() const {
    return buffers_;
  }
  std::map<std::string, std::string>& descriptor() { return descriptor_; }
  const std::map<std::string, std::string>& descriptor() const { return descriptor_; }

  void zero_grad() {
    for (auto& [_, p] : params_) p->zero_grad();
  }

  Index parameter_count() const {
    Index n = 0;
    for (const auto& [_, p] : params_) n += p->value.size();
    return n;
  }

  bool all_finite() const {
    for (const auto& [_, p] : params_) {
      if (!p->value.all_finite()) return false;
    }
    return true;
  }

  StateDict state_dict() const {
    StateDict sd;
    sd.descriptor = descriptor_;
    for (const auto& [n, p] : params_) sd.tensors.emplace_back(n, p->value.template cast<float>());
    for (const auto& [n, b] : buffers_) sd.tensors.emplace_back(n, b->template cast<float>());
    return sd;
  }

  void load_state_dict(const StateDict& sd) {
    if (sd.descriptor != descriptor_) {
      throw std::invalid_argument("load_state_dict: architecture descriptor mismatch");
    }
    for (auto& [n, p] : params_) assign(n, p->value, sd);
    for (auto& [n, b] : buffers_) assign(n, *b, sd);
  }

 private:
  static void assign(const std::string& name, Tensor<Scalar>& dst, const StateDict& sd) {
    const Tensor<float>* src = sd.find(name);
    if (!src) throw std::invalid_argument("load_state_dict: missing tensor " + name);
    require_shape(src->shape, dst.shape, name.c_str());
    dst = src->template cast<Scalar>();
  }

  std::vector<std::pair<std::string, VarT>> params_;
  std::vector<std::pair<std::string, std::shared_ptr<Tensor<Scalar>>>> buffers_;
  std::map<std::string, std::string> descriptor_;
};

namespace ad {

namespace detail {

// Unfolds (c, h, w) patches of one image into columns of `cols`
// (c*k*k rows, out_h*out_w columns) starting at column `col0`.
template <typename Scalar, typename Cols>
void im2col(const Scalar* img, Index channels, Index h, Index w, Index k, Index stride,
            Index pad, Index out_h, Index out_w, Cols& cols, Index col0) {
  for (Index c = 0; c < channels; ++c) {
    for (Index ki = 0; ki < k; ++ki) {
      for (Index kj = 0; kj < k; ++kj) {
        const Index row = (c * k + ki) * k + kj;
        for (Index oy = 0; oy < out_h; ++oy) {
          const Index iy = oy * stride + ki - pad;
          for (Index ox = 0; ox < out_w; ++ox) {
            const Index ix = ox * stride + kj - pad;
            cols(row, col0 + oy * out_w + ox) =
                (iy >= 0 && iy < h && ix >= 0 && ix < w) ? img[(c * h + iy) * w + ix] : Scalar(0);
          }
        }
      }
    }
  }
}

template <typename Scalar, typename Cols>
void col2im(const Cols& cols, Index col0, Index channels, Index h, Index w, Index k,
            Index stride, Index pad, Index out_h, Index out_w, Scalar* img) {
  for (Index c = 0; c < channels; ++c) {
    for (Index ki = 0; ki < k; ++ki) {
      for (Index kj = 0; kj < k; ++kj) {
        const Index row = (c * k + ki) * k + kj;
        for (Index oy = 0; oy < out_h; ++oy) {
          const Index iy = oy * stride + ki - pad;
          if (iy < 0 || iy >= h) continue;
          for (Index ox = 0; ox < out_w; ++ox) {
            const Index ix = ox * stride + kj - pad;
            if (ix < 0 || ix >= w) continue;
            img[(c * h + iy) * w + ix] += cols(row, col0 + oy * out_w + ox);
          }
        }
      }
    }
  }
}

}  // namespace detail

// Square-kernel 2-D convolution (cross-correlation) without bias.
// x (n, cin, h, w), weight (cout, cin, k, k).
template <typename Scalar>
Var<Scalar> conv2d(const Var<Scalar>& x, const Var<Scalar>& weight, Index stride, Index pad) {
  const auto& xs = x->value.shape;
  const auto& ws = weight->value.shape;
  if (xs.size() != 4 || ws.size() != 4 || ws[1] != xs[1] || ws[2] != ws[3]) {
    throw ShapeError("conv2d: incompatible input " + to_string(xs) + " and weight " + to_string(ws));
  }
  const Index n = xs[0], cin = xs[1], h = xs[2], w = xs[3];
  const Index cout = ws[0], k = ws[2];
  const Index out_h = (h + 2 * pad - k) / stride + 1;
  const Index out_w = (w + 2 * pad - k) / stride + 1;
  const Index spatial = out_h * out_w;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using RowMajor = typename Tensor<Scalar>::RowMajor;

  // Row-major so the inner im2col loop writes contiguously.
  auto unfold = [=](const Tensor<Scalar>& input) {
    typename Tensor<Scalar>::RowMajor cols(cin * k * k, n * spatial);
    for (Index i = 0; i < n; ++i) {
      detail::im2col(input.ptr() + i * cin * h * w, cin, h, w, k, stride, pad, out_h, out_w,
                     cols, i * spatial);
    }
    return cols;
  };

  Eigen::Map<const RowMajor> wm(weight->value.ptr(), cout, cin * k * k);
  Mat y = wm * unfold(x->value);  // (cout, n*spatial)
  Tensor<Scalar> out({n, cout, out_h, out_w});
  for (Index i = 0; i < n; ++i) {
    Eigen::Map<RowMajor>(out.ptr() + i * cout * spatial, cout, spatial) =
        y.middleCols(i * spatial, spatial);
  }
  return make_node<Scalar>(
      std::move(out), {x, weight}, [=](const Node<Scalar>& self) {
        Mat gy(cout, n * spatial);
        for (Index i = 0; i < n; ++i) {
          gy.middleCols(i * spatial, spatial) =
              Eigen::Map<const RowMajor>(self.grad.data() + i * cout * spatial, cout, spatial);
        }
        Eigen::Map<const RowMajor> wmat(weight->value.ptr(), cout, cin * k * k);
        if (weight->requires_grad) {
          Eigen::Map<RowMajor> gw(weight->grad_buffer().data(), cout, cin * k * k);
          gw.noalias() += gy * unfold(x->value).transpose();
        }
        if (x->requires_grad) {
          typename Tensor<Scalar>::RowMajor gcols = wmat.transpose() * gy;
          auto& gx = x->grad_buffer();
          for (Index i = 0; i < n; ++i) {
            detail::col2im(gcols, i * spatial, cin, h, w, k, stride, pad, out_h, out_w,
                           gx.data() + i * cin * h * w);
          }
        }
      });
}

// Per-channel normalization over (batch, h, w). Training mode uses batch
// statistics and updates the running estimates; eval mode uses the running
// estimates.
template <typename Scalar>
struct BatchNormStats {
  std::shared_ptr<Tensor<Scalar>> running_mean;
  std::shared_ptr<Tensor<Scalar>> running_var;
  Scalar momentum = Scalar(0.1);
  Scalar eps = Scalar(1e-5);
};

template <typename Scalar>
Var<Scalar> batch_norm(const Var<Scalar>& x, const Var<Scalar>& gamma, const Var<Scalar>& beta,
                       BatchNormStats<Scalar>& stats, bool training) {
  const auto& xs = x->value.shape;
  if (xs.size() != 4) throw ShapeError("batch_norm: rank-4 input required");
  const Index n = xs[0], c = xs[1], hw = xs[2] * xs[3];
  const Index count = n * hw;
  using Vec = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  Vec mu(c), var(c);
  if (training) {
    mu.setZero();
    var.setZero();
    for (Index i = 0; i < n; ++i) {
      for (Index ch = 0; ch < c; ++ch) {
        mu[ch] += x->value.data.segment((i * c + ch) * hw, hw).sum();
      }
    }
    mu /= static_cast<Scalar>(count);
    for (Index i = 0; i < n; ++i) {
      for (Index ch = 0; ch < c; ++ch) {
        var[ch] += (x->value.data.segment((i * c + ch) * hw, hw) - mu[ch]).square().sum();
      }
    }
    var /= static_cast<Scalar>(count);
    const Scalar unbias = count > 1 ? static_cast<Scalar>(count) / static_cast<Scalar>(count - 1) : Scalar(1);
    stats.running_mean->data = (Scalar(1) - stats.momentum) * stats.running_mean->data + stats.momentum * mu;
    stats.running_var->data =
        (Scalar(1) - stats.momentum) * stats.running_var->data + stats.momentum * var * unbias;
  } else {
    mu = stats.running_mean->data;
    var = stats.running_var->data;
  }
  Vec inv_std = (var + stats.eps).rsqrt();
  auto xhat = std::make_shared<Tensor<Scalar>>(x->value.shape);
  Tensor<Scalar> out(x->value.shape);
  for (Index i = 0; i < n; ++i) {
    for (Index ch = 0; ch < c; ++ch) {
      const Index off = (i * c + ch) * hw;
      xhat->data.segment(off, hw) = (x->value.data.segment(off, hw) - mu[ch]) * inv_std[ch];
      out.data.segment(off, hw) = xhat->data.segment(off, hw) * gamma->value[ch] + beta->value[ch];
    }
  }
  return make_node<Scalar>(
      std::move(out), {x, gamma, beta}, [=](const Node<Scalar>& self) {
        Vec gsum = Vec::Zero(c), gxhat = Vec::Zero(c);
        for (Index i = 0; i < n; ++i) {
          for (Index ch = 0; ch < c; ++ch) {
            const Index off = (i * c + ch) * hw;
            gsum[ch] += self.grad.segment(off, hw).sum();
            gxhat[ch] += (self.grad.segment(off, hw) * xhat->data.segment(off, hw)).sum();
          }
        }
        if (gamma->requires_grad) gamma->grad_buffer() += gxhat;
        if (beta->requires_grad) beta->grad_buffer() += gsum;
        if (!x->requires_grad) return;
        auto& gx = x->grad_buffer();
        const Scalar inv_count = Scalar(1) / static_cast<Scalar>(count);
        for (Index i = 0; i < n; ++i) {
          for (Index ch = 0; ch < c; ++ch) {
            const Index off = (i * c + ch) * hw;
            const Scalar scale = gamma->value[ch] * inv_std[ch];
            if (training) {
              gx.segment(off, hw) +=
                  scale * (self.grad.segment(off, hw) - gsum[ch] * inv_count -
                           xhat->data.segment(off, hw) * gxhat[ch] * inv_count);
            } else {
              gx.segment(off, hw) += scale * self.grad.segment(off, hw);
            }
          }
        }
      });
}

// (n, c, h, w) -> (n, c)
template <typename Scalar>
Var<Scalar> global_avg_pool(const Var<Scalar>& x) {
  const auto& xs = x->value.shape;
  if (xs.size() != 4) throw ShapeError("global_avg_pool: rank-4 input required");
  const Index nc = xs[0] * xs[1], hw = xs[2] * xs[3];
  Tensor<Scalar> out({xs[0], xs[1]});
  for (Index i = 0; i < nc; ++i) out[i] = x->value.data.segment(i * hw, hw).mean();
  return make_node<Scalar>(std::move(out), {x}, [x, nc, hw](const Node<Scalar>& self) {
    auto& gx = x->grad_buffer();
    for (Index i = 0; i < nc; ++i) gx.segment(i * hw, hw) += self.grad[i] / static_cast<Scalar>(hw);
  });
}

}  // namespace ad

// ---------------------------------------------------------------------------
// Layers. Each registers its tensors in a NetState under a name prefix.

template <typename Scalar>
Tensor<Scalar> fan_in_gaussian(Shape shape, Index fan_in, std::mt19937_64& rng) {
  Tensor<Scalar> t(std::move(shape));
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  for (Index i = 0; i < t.size(); ++i) t[i] = static_cast<Scalar>(normal(rng));
  return t;
}

template <typename Scalar>
struct Conv2d {
  ad::Var<Scalar> weight;
  Index stride = 1, pad = 1;

  Conv2d() = default;
  Conv2d(NetState<Scalar>& net, const std::string& name, Index cin, Index cout, Index k,
         Index stride_, std::mt19937_64& rng)
      : stride(stride_), pad(k / 2) {
    weight = net.add_param(name + ".weight",
                           fan_in_gaussian<Scalar>({cout, cin, k, k}, cin * k * k, rng));
  }
  ad::Var<Scalar> operator()(const ad::Var<Scalar>& x) const {
    return ad::conv2d(x, weight, stride, pad);
  }
};

template <typename Scalar>
struct BatchNorm {
  ad::Var<Scalar> gamma, beta;
  ad::BatchNormStats<Scalar> stats;

  BatchNorm() = default;
  BatchNorm(NetState<Scalar>& net, const std::string& name, Index channels) {
    gamma = net.add_param(name + ".gamma", Tensor<Scalar>::filled({channels}, Scalar(1)));
    beta = net.add_param(name + ".beta", Tensor<Scalar>({channels}));
    stats.running_mean = net.add_buffer(name + ".running_mean", Tensor<Scalar>({channels}));
    stats.running_var =
        net.add_buffer(name + ".running_var", Tensor<Scalar>::filled({channels}, Scalar(1)));
  }
  ad::Var<Scalar> operator()(const ad::Var<Scalar>& x, bool training) {
    return ad::batch_norm(x, gamma, beta, stats, training);
  }
};

template <typename Scalar>
struct Linear {
  ad::Var<Scalar> weight, bias;

  Linear() = default;
  // zero_init gives an all-zero layer (used for output heads).
  Linear(NetState<Scalar>& net, const std::string& name, Index in, Index out, bool zero_init,
         std::mt19937_64& rng) {
    weight = net.add_param(name + ".weight", zero_init ? Tensor<Scalar>({out, in})
                                                       : fan_in_gaussian<Scalar>({out, in}, in, rng));
    bias = net.add_param(name + ".bias", Tensor<Scalar>({out}));
  }
  ad::Var<Scalar> operator()(const ad::Var<Scalar>& x) const {
    return ad::linear(x, weight, bias);
  }
};

// conv-bn-relu-conv-bn plus (projected) skip, then relu.
template <typename Scalar>
struct ResidualBlock {
  Conv2d<Scalar> conv1, conv2, proj;
  BatchNorm<Scalar> bn1, bn2, proj_bn;
  bool has_proj = false;

  ResidualBlock() = default;
  ResidualBlock(NetState<Scalar>& net, const std::string& name, Index cin, Index cout,
                Index stride, std::mt19937_64& rng)
      : conv1(net, name + ".conv1", cin, cout, 3, stride, rng),
        conv2(net, name + ".conv2", cout, cout, 3, 1, rng),
        bn1(net, name + ".bn1", cout),
        bn2(net, name + ".bn2", cout),
        has_proj(stride != 1 || cin != cout) {
    if (has_proj) {
      proj = Conv2d<Scalar>(net, name + ".proj", cin, cout, 1, stride, rng);
      proj_bn = BatchNorm<Scalar>(net, name + ".proj_bn", cout);
    }
  }

  ad::Var<Scalar> operator()(const ad::Var<Scalar>& x, bool training) {
    auto h = ad::relu(bn1(conv1(x), training));
    h = bn2(conv2(h), training);
    auto skip = has_proj ? proj_bn(proj(x), training) : x;
    return ad::relu(ad::add(h, skip));
  }
};

}  // namespace tfscil

#endif  // TFSCIL_LAYERS_HPP_
