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

#ifndef TFSCIL_SPECTROGRAM_HPP_
#define TFSCIL_SPECTROGRAM_HPP_

#include <stdexcept>
#include <vector>

#include "tfscil/tensor.hpp"

namespace tfscil {

// Multi-channel log-energy grid, stored [channel][mel bin][frame] with the
// frame index fastest. The layout matches one slot of a (n, c, f, t) batch.
template <typename Scalar>
struct Spectrogram {
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Index channels = 0;
  Index mel_bins = 0;
  Index frames = 0;
  Array values;

  Spectrogram() = default;
  Spectrogram(Index c, Index f, Index t) : channels(c), mel_bins(f), frames(t), values(Array::Zero(c * f * t)) {
    if (c < 1 || f < 2 || t < 1) {
      throw std::invalid_argument("Spectrogram: need channels >= 1, mel_bins >= 2, frames >= 1");
    }
  }

  Scalar& operator()(Index c, Index f, Index t) { return values[(c * mel_bins + f) * frames + t]; }
  Scalar operator()(Index c, Index f, Index t) const { return values[(c * mel_bins + f) * frames + t]; }

  Index size() const { return values.size(); }
  bool same_shape(const Spectrogram& o) const {
    return channels == o.channels && mel_bins == o.mel_bins && frames == o.frames;
  }
  bool all_finite() const { return values.allFinite(); }
  Shape batch_shape(Index n = 1) const { return {n, channels, mel_bins, frames}; }

  Tensor<Scalar> as_batch() const { return Tensor<Scalar>(batch_shape(), values); }

  static Spectrogram from_batch(const Tensor<Scalar>& batch, Index n) {
    if (batch.rank() != 4 || n < 0 || n >= batch.dim(0)) {
      throw ShapeError("Spectrogram::from_batch: bad batch " + to_string(batch.shape));
    }
    Spectrogram s(batch.dim(1), batch.dim(2), batch.dim(3));
    s.values = batch.data.segment(n * s.size(), s.size());
    return s;
  }

  template <typename Other>
  Spectrogram<Other> cast() const {
    Spectrogram<Other> s(channels, mel_bins, frames);
    s.values = values.template cast<Other>();
    return s;
  }
};

template <typename Scalar>
Tensor<Scalar> stack(const std::vector<Spectrogram<Scalar>>& items) {
  if (items.empty()) throw std::invalid_argument("stack: empty batch");
  Tensor<Scalar> out(items.front().batch_shape(static_cast<Index>(items.size())));
  const Index sz = items.front().size();
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!items[i].same_shape(items.front())) throw ShapeError("stack: spectrogram shapes differ");
    out.data.segment(static_cast<Index>(i) * sz, sz) = items[i].values;
  }
  return out;
}

// Mean absolute difference per element.
template <typename Scalar>
Scalar l1_per_element(const Spectrogram<Scalar>& a, const Spectrogram<Scalar>& b) {
  if (!a.same_shape(b)) throw ShapeError("l1_per_element: shape mismatch");
  return (a.values - b.values).abs().mean();
}

}  // namespace tfscil

#endif  // TFSCIL_SPECTROGRAM_HPP_
