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

#ifndef TFSCIL_NETS_HPP_
#define TFSCIL_NETS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "tfscil/layers.hpp"
#include "tfscil/rng.hpp"
#include "tfscil/transform.hpp"

namespace tfscil {

// Input geometry shared by both networks.
struct InputShape {
  Index channels = 1;
  Index mel_bins = 32;
  Index frames = 24;
  friend bool operator==(const InputShape&, const InputShape&) = default;
};

struct EstimatorConfig {
  int block_count = 3;
  int base_width = 8;
  friend bool operator==(const EstimatorConfig&, const EstimatorConfig&) = default;
};

struct EmbedderConfig {
  std::vector<int> widths{16, 32, 64, 128};
  int blocks_per_stage = 2;
  int embedding_dim = 64;
  void validate() const {
    if (widths.empty()) throw std::invalid_argument("EmbedderConfig: no stages");
    if (blocks_per_stage < 1) throw std::invalid_argument("EmbedderConfig: blocks_per_stage must be >= 1");
    if (embedding_dim < 8) throw std::invalid_argument("EmbedderConfig: embedding_dim must be >= 8");
  }
  friend bool operator==(const EmbedderConfig&, const EmbedderConfig&) = default;
};

namespace detail {

template <typename Scalar>
void check_input(const Tensor<Scalar>& x, const InputShape& in, const char* who) {
  if (x.rank() != 4 || x.dim(1) != in.channels || x.dim(2) != in.mel_bins || x.dim(3) != in.frames) {
    throw ShapeError(std::string(who) + ": input " + to_string(x.shape) + " does not match (n, " +
                     std::to_string(in.channels) + ", " + std::to_string(in.mel_bins) + ", " +
                     std::to_string(in.frames) + ")");
  }
}

template <typename Scalar>
void check_finite(const ad::Var<Scalar>& v, const char* who) {
  if (!v->value.all_finite()) throw std::runtime_error(std::string(who) + ": non-finite activation");
}

// Appends normalized frequency and time coordinate planes to every map so
// the pooled features can locate spectral content.
template <typename Scalar>
ad::Var<Scalar> with_coordinates(const ad::Var<Scalar>& x) {
  const Index n = x->value.dim(0), c = x->value.dim(1), f = x->value.dim(2), t = x->value.dim(3);
  const auto rf = freq_coords<Scalar>(f);
  const auto rt = freq_coords<Scalar>(t);
  Tensor<Scalar> out({n, c + 2, f, t});
  const Index plane = f * t;
  for (Index i = 0; i < n; ++i) {
    out.data.segment(i * (c + 2) * plane, c * plane) = x->value.data.segment(i * c * plane, c * plane);
    Scalar* fp = out.ptr() + (i * (c + 2) + c) * plane;
    Scalar* tp = fp + plane;
    for (Index a = 0; a < f; ++a) {
      for (Index b = 0; b < t; ++b) {
        fp[a * t + b] = rf[a];
        tp[a * t + b] = rt[b];
      }
    }
  }
  return ad::make_node<Scalar>(std::move(out), {x}, [x, n, c, plane](const ad::Node<Scalar>& self) {
    auto& g = x->grad_buffer();
    for (Index i = 0; i < n; ++i) {
      g.segment(i * c * plane, c * plane) += self.grad.segment(i * (c + 2) * plane, c * plane);
    }
  });
}

}  // namespace detail

// Context estimator: coordinate-augmented stem, residual blocks, global
// average pooling and a zero-initialized linear head squashed into the
// context bounds.
template <typename Scalar>
class ContextEstimator {
 public:
  ContextEstimator(const EstimatorConfig& cfg, const ContextBounds& bounds, const InputShape& input,
                   std::uint64_t seed)
      : bounds_(bounds), input_(input) {
    bounds.validate();
    Rng rng = make_rng(seed, Stream::kInit, 1);
    auto& d = net_.descriptor();
    d["kind"] = "context_estimator";
    d["blocks"] = std::to_string(cfg.block_count);
    d["width"] = std::to_string(cfg.base_width);
    d["input"] = std::to_string(input.channels) + "x" + std::to_string(input.mel_bins) + "x" +
                 std::to_string(input.frames);
    stem_ = Conv2d<Scalar>(net_, "est.stem", input.channels + 2, cfg.base_width, 3, 1, rng);
    stem_bn_ = BatchNorm<Scalar>(net_, "est.stem_bn", cfg.base_width);
    for (int b = 0; b < cfg.block_count; ++b) {
      blocks_.emplace_back(net_, "est.block" + std::to_string(b), cfg.base_width, cfg.base_width, 1, rng);
    }
    head_ = Linear<Scalar>(net_, "est.head", cfg.base_width, 4, true, rng);
  }

  // (n, c, F, T) -> (n, 4) contexts inside the bounds.
  ad::Var<Scalar> forward(const ad::Var<Scalar>& maps, bool training) {
    detail::check_input(maps->value, input_, "ContextEstimator");
    auto h = ad::relu(stem_bn_(stem_(detail::with_coordinates(maps)), training));
    for (auto& block : blocks_) h = block(h, training);
    auto ctx = ad::context_head(head_(ad::global_avg_pool(h)), bounds_);
    detail::check_finite(ctx, "ContextEstimator");
    return ctx;
  }

  std::vector<ContextParams> estimate(const Tensor<Scalar>& maps) {
    return ad::context_list(forward(ad::constant(maps), false)->value);
  }
  ContextParams estimate(const Spectrogram<Scalar>& m) { return estimate(m.as_batch()).front(); }

  // Inverse transform with the estimated context; differentiable through
  // the estimate into the warp.
  ad::Var<Scalar> canonicalize(const ad::Var<Scalar>& maps, bool training) {
    return ad::apply_inverse(maps, forward(maps, training));
  }
  Spectrogram<Scalar> canonicalize(const Spectrogram<Scalar>& m) {
    return Spectrogram<Scalar>::from_batch(canonicalize(ad::constant(m.as_batch()), false)->value, 0);
  }

  NetState<Scalar>& state() { return net_; }
  const NetState<Scalar>& state() const { return net_; }
  Linear<Scalar>& head() { return head_; }
  const ContextBounds& bounds() const { return bounds_; }
  const InputShape& input_shape() const { return input_; }

 private:
  NetState<Scalar> net_;
  ContextBounds bounds_;
  InputShape input_;
  Conv2d<Scalar> stem_;
  BatchNorm<Scalar> stem_bn_;
  std::vector<ResidualBlock<Scalar>> blocks_;
  Linear<Scalar> head_;
};

// Residual convnet embedder: stem, stages of residual blocks (stride 2 at
// the start of every stage after the first), global pooling, projection.
template <typename Scalar>
class Embedder {
 public:
  Embedder(const EmbedderConfig& cfg, const InputShape& input, std::uint64_t seed) : input_(input) {
    cfg.validate();
    Rng rng = make_rng(seed, Stream::kInit, 2);
    auto& d = net_.descriptor();
    d["kind"] = "embedder";
    std::string widths;
    for (int w : cfg.widths) widths += (widths.empty() ? "" : ",") + std::to_string(w);
    d["widths"] = widths;
    d["blocks_per_stage"] = std::to_string(cfg.blocks_per_stage);
    d["dim"] = std::to_string(cfg.embedding_dim);
    d["input"] = std::to_string(input.channels) + "x" + std::to_string(input.mel_bins) + "x" +
                 std::to_string(input.frames);
    stem_ = Conv2d<Scalar>(net_, "emb.stem", input.channels, cfg.widths.front(), 3, 1, rng);
    stem_bn_ = BatchNorm<Scalar>(net_, "emb.stem_bn", cfg.widths.front());
    int cin = cfg.widths.front();
    for (std::size_t s = 0; s < cfg.widths.size(); ++s) {
      for (int b = 0; b < cfg.blocks_per_stage; ++b) {
        const Index stride = (s > 0 && b == 0) ? 2 : 1;
        blocks_.emplace_back(net_, "emb.s" + std::to_string(s) + ".b" + std::to_string(b), cin,
                             cfg.widths[s], stride, rng);
        cin = cfg.widths[s];
      }
    }
    proj_ = Linear<Scalar>(net_, "emb.proj", cin, cfg.embedding_dim, false, rng);
    dim_ = cfg.embedding_dim;
  }

  // (n, c, F, T) -> (n, d) unnormalized embeddings.
  ad::Var<Scalar> forward(const ad::Var<Scalar>& maps, bool training) {
    detail::check_input(maps->value, input_, "Embedder");
    auto h = ad::relu(stem_bn_(stem_(maps), training));
    for (auto& block : blocks_) h = block(h, training);
    auto z = proj_(ad::global_avg_pool(h));
    detail::check_finite(z, "Embedder");
    return z;
  }

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> embed(const Spectrogram<Scalar>& m) {
    auto z = forward(ad::constant(m.as_batch()), false);
    return z->value.data.matrix();
  }

  Index dim() const { return dim_; }
  NetState<Scalar>& state() { return net_; }
  const NetState<Scalar>& state() const { return net_; }
  Linear<Scalar>& projection() { return proj_; }
  const InputShape& input_shape() const { return input_; }

 private:
  NetState<Scalar> net_;
  InputShape input_;
  Conv2d<Scalar> stem_;
  BatchNorm<Scalar> stem_bn_;
  std::vector<ResidualBlock<Scalar>> blocks_;
  Linear<Scalar> proj_;
  Index dim_ = 0;
};

}  // namespace tfscil

#endif  // TFSCIL_NETS_HPP_
