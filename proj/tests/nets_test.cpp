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

#include <gtest/gtest.h>

#include "tfscil/gradcheck.hpp"
#include "tfscil/nets.hpp"

namespace tfscil {
namespace {

const InputShape kInput{1, 12, 10};

EstimatorConfig small_estimator() {
  EstimatorConfig c;
  c.block_count = 1;
  c.base_width = 4;
  return c;
}

EmbedderConfig small_embedder() {
  EmbedderConfig c;
  c.widths = {4, 8};
  c.blocks_per_stage = 1;
  c.embedding_dim = 8;
  return c;
}

Tensor<double> random_batch(Index n, std::uint64_t seed) {
  Rng rng = make_rng(seed, Stream::kInit, 0);
  Tensor<double> x({n, kInput.channels, kInput.mel_bins, kInput.frames});
  for (Index i = 0; i < x.size(); ++i) x[i] = uniform(rng, -1.0, 1.0);
  return x;
}

TEST(Estimator, ZeroHeadGivesIdentityNeighborhood) {
  const ContextBounds b;
  ContextEstimator<double> est(small_estimator(), b, kInput, 1);
  for (const auto& c : est.estimate(random_batch(3, 2))) {
    EXPECT_EQ(c.delta, 0.0);
    EXPECT_NEAR(c.tau, 0.5 * (b.tau_min + b.tau_max), 1e-12);
    EXPECT_EQ(c.bias, 0.0);
    EXPECT_EQ(c.tilt, 0.0);
  }
}

TEST(Estimator, IdentityBoundsCanonicalizeIsIdentity) {
  ContextEstimator<double> est(small_estimator(), ContextBounds::identity_only(), kInput, 1);
  const auto x = random_batch(1, 3);
  const auto m = Spectrogram<double>::from_batch(x, 0);
  EXPECT_LT((est.canonicalize(m).values - m.values).abs().maxCoeff(), 1e-12);
}

TEST(Estimator, OutputsRespectBounds) {
  const ContextBounds b;
  ContextEstimator<double> est(small_estimator(), b, kInput, 4);
  Rng rng = make_rng(4, Stream::kInit, 5);
  auto& head = est.head();
  for (Index i = 0; i < head.weight->value.size(); ++i) head.weight->value[i] = uniform(rng, -20.0, 20.0);
  for (const auto& c : est.estimate(random_batch(6, 6))) EXPECT_TRUE(b.contains(c, 1e-12)) << c;
}

TEST(Estimator, ShapeMismatchThrows) {
  ContextEstimator<double> est(small_estimator(), ContextBounds{}, kInput, 1);
  EXPECT_THROW(est.forward(ad::constant(Tensor<double>({1, 1, 12, 9})), false), ShapeError);
}

TEST(Estimator, NonFiniteInputThrows) {
  ContextEstimator<double> est(small_estimator(), ContextBounds{}, kInput, 1);
  auto x = random_batch(1, 7);
  x[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(est.forward(ad::constant(x), false), std::runtime_error);
}

TEST(Estimator, CanonicalizeGradientMatchesFiniteDifference) {
  ContextEstimator<double> est(small_estimator(), ContextBounds{}, kInput, 8);
  Rng rng = make_rng(8, Stream::kInit, 9);
  auto& head = est.head();
  for (Index i = 0; i < head.weight->value.size(); ++i) head.weight->value[i] = uniform(rng, -0.3, 0.3);
  for (Index i = 0; i < head.bias->value.size(); ++i) head.bias->value[i] = uniform(rng, -0.3, 0.3);
  const auto x = ad::constant(random_batch(2, 10));
  Tensor<double> w(x->value.shape);
  for (Index i = 0; i < w.size(); ++i) w[i] = uniform(rng, -1.0, 1.0);
  const auto target = ad::constant(w);
  NamedParams head_params{{"weight", head.weight}, {"bias", head.bias}};
  GradCheckOptions opt;
  opt.probe_count = 24;
  const auto rep = grad_check(head_params, [&] { return ad::l1_mean(est.canonicalize(x, false), target); }, opt);
  EXPECT_TRUE(rep.passed()) << rep.max_rel_error;
}

TEST(Embedder, DeterministicInEvalMode) {
  Embedder<double> emb(small_embedder(), kInput, 11);
  const auto m = Spectrogram<double>::from_batch(random_batch(1, 12), 0);
  const auto a = emb.embed(m);
  const auto b = emb.embed(m);
  EXPECT_EQ(a.size(), 8);
  EXPECT_TRUE(a.allFinite());
  EXPECT_EQ(a, b);
}

TEST(Embedder, SeedControlsInitialization) {
  Embedder<double> a(small_embedder(), kInput, 1), b(small_embedder(), kInput, 1), c(small_embedder(), kInput, 2);
  const auto m = Spectrogram<double>::from_batch(random_batch(1, 13), 0);
  EXPECT_EQ(a.embed(m), b.embed(m));
  EXPECT_NE(a.embed(m), c.embed(m));
}

TEST(Embedder, RejectsTinyEmbedding) {
  EmbedderConfig cfg = small_embedder();
  cfg.embedding_dim = 4;
  EXPECT_THROW(Embedder<double>(cfg, kInput, 1), std::invalid_argument);
}

TEST(StateDict, RoundTripsAndChecksDescriptor) {
  Embedder<double> a(small_embedder(), kInput, 1), b(small_embedder(), kInput, 2);
  b.state().load_state_dict(a.state().state_dict());
  const auto m = Spectrogram<double>::from_batch(random_batch(1, 14), 0);
  EXPECT_TRUE(a.embed(m).isApprox(b.embed(m), 1e-6));
  EmbedderConfig wider = small_embedder();
  wider.widths = {4, 16};
  Embedder<double> c(wider, kInput, 1);
  EXPECT_THROW(c.state().load_state_dict(a.state().state_dict()), std::invalid_argument);
}

}  // namespace
}  // namespace tfscil
