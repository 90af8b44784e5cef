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

#include <cmath>

#include <gtest/gtest.h>

#include "tfscil/synth.hpp"
#include "tfscil/ucpc.hpp"

namespace tfscil {
namespace {

ClassRecord record(int id, Eigen::VectorXd mu, double sigma = 0.05) {
  ClassRecord r;
  r.id = id;
  r.mu = mu;
  r.mu_ucpc = mu;
  r.sigma_ucpc = sigma;
  return r;
}

TEST(Shrink, EqualVariancesAverage) {
  PriorStats p{Eigen::VectorXd::Zero(3), 0.5};
  const auto post = shrink(Eigen::VectorXd::Constant(3, 2.0), p, 0.5);
  EXPECT_DOUBLE_EQ(post.lambda, 0.5);
  EXPECT_TRUE(post.center.isApprox(Eigen::VectorXd::Constant(3, 1.0)));
  EXPECT_DOUBLE_EQ(post.variance, 0.25);
}

TEST(Shrink, NoisyObservationLeansOnPrior) {
  PriorStats p{Eigen::VectorXd::Zero(2), 1.0};
  const auto post = shrink(Eigen::VectorXd::Ones(2), p, 3.0);
  EXPECT_DOUBLE_EQ(post.lambda, 0.75);
  EXPECT_TRUE(post.center.isApprox(Eigen::VectorXd::Constant(2, 0.25)));
  EXPECT_DOUBLE_EQ(post.variance, 0.75);
}

TEST(Shrink, LambdaIncreasesWithObservationVariance) {
  PriorStats p{Eigen::VectorXd::Zero(1), 0.2};
  double prev = 0;
  for (double s2 = 0.01; s2 < 10; s2 *= 1.5) {
    const double lambda = shrink(Eigen::VectorXd::Ones(1), p, s2).lambda;
    EXPECT_GT(lambda, prev);
    prev = lambda;
  }
  EXPECT_LT(prev, 1.0);
}

TEST(Shrink, RejectsBadInputs) {
  PriorStats p{Eigen::VectorXd::Zero(2), 1.0};
  EXPECT_THROW(shrink(Eigen::VectorXd::Ones(2), p, 0.0), std::invalid_argument);
  EXPECT_THROW(shrink(Eigen::VectorXd::Ones(3), p, 1.0), std::invalid_argument);
}

TEST(PriorStats, PlusMinusBasisVector) {
  const Index d = 4;
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(d);
  e1[0] = 1;
  const auto p = prior_stats({record(0, e1), record(1, -e1)});
  EXPECT_TRUE(p.mu_p.isZero(0));
  EXPECT_DOUBLE_EQ(p.sigma2_p, 1.0 / double(d));
}

TEST(PriorStats, FloorsIdenticalPrototypesAndNeedsTwo) {
  const Eigen::VectorXd v = Eigen::VectorXd::Ones(3);
  EXPECT_EQ(prior_stats({record(0, v), record(1, v)}).sigma2_p, kPriorVarianceFloor);
  EXPECT_THROW(prior_stats({record(0, v)}), std::invalid_argument);
}

TEST(UncertaintyMap, AffineAndValidated) {
  UncertaintyMap m;
  EXPECT_DOUBLE_EQ(m.variance(0.0), 0.05);
  EXPECT_DOUBLE_EQ(m.variance(0.2), 0.25);
  m.beta = 0;
  EXPECT_THROW(m.validate(), std::invalid_argument);
}

TEST(Uncertainty, ZeroWhenCanonicalizationIgnoresContext) {
  Spectrogram<double> m(1, 8, 6);
  m.values.setConstant(1.5);
  // A canonicalizer that maps everything to the same map.
  const auto flat = [&](const Tensor<double>& b) {
    Tensor<double> out(b.shape);
    out.data.setConstant(0.25);
    return out;
  };
  Rng rng = make_rng(1, Stream::kUncertainty, 0);
  EXPECT_EQ(sample_uncertainty(flat, m, m, 5, ContextBounds{}, rng), 0.0);
  EXPECT_THROW(sample_uncertainty(flat, m, m, 0, ContextBounds{}, rng), std::invalid_argument);
}

TEST(Uncertainty, IdentityCanonicalizerMeasuresPerturbationSize) {
  Spectrogram<double> m(1, 8, 6);
  const auto id = [](const Tensor<double>& b) { return b; };
  // Pure bias pseudo-contexts move every cell by |b|.
  const std::vector<ContextParams> draws{{0, 1, 0.2, 0}, {0, 1, -0.4, 0}};
  EXPECT_NEAR(sample_uncertainty(id, m, m, draws), 0.3, 1e-12);
  EXPECT_DOUBLE_EQ(class_uncertainty({0.1, 0.3}), 0.2);
}

TEST(Classify, PicksNearestCosineAndBreaksTiesByLowestId) {
  std::vector<ClassRecord> recs{record(7, Eigen::Vector2d(1, 0)), record(3, Eigen::Vector2d(0, 1)),
                                record(5, Eigen::Vector2d(0, 2))};
  const auto c = classify(Eigen::Vector2d(0.1, 1.0), recs, nullptr, false);
  EXPECT_EQ(c.label, 3);
  EXPECT_NEAR(c.probs.sum(), 1.0, 1e-12);
  EXPECT_NEAR(c.logits[1], c.logits[2], 1e-15);
  EXPECT_EQ(classify(Eigen::Vector2d(1, 0.1), recs, nullptr, false).label, 7);
}

TEST(Classify, ScaleInvariantInEmbedding) {
  std::vector<ClassRecord> recs{record(0, Eigen::Vector3d(1, 2, 0)), record(1, Eigen::Vector3d(0, -1, 1))};
  const Eigen::Vector3d z(0.3, 0.1, 0.4);
  EXPECT_TRUE(classify(z, recs, nullptr, false).probs.isApprox(classify(9.0 * z, recs, nullptr, false).probs));
}

TEST(Classify, StochasticNeedsRngAndRejectsBadEmbeddings) {
  std::vector<ClassRecord> recs{record(0, Eigen::Vector2d(1, 0))};
  EXPECT_THROW(classify(Eigen::Vector2d(1, 0), recs, nullptr, true), std::invalid_argument);
  EXPECT_THROW(classify(Eigen::Vector2d(0, 0), recs, nullptr, false), std::invalid_argument);
  EXPECT_THROW(classify(Eigen::Vector2d(1, 0), {}, nullptr, false), std::invalid_argument);
}

TEST(Classify, StochasticSpreadGrowsWithVariance) {
  const auto flips = [](double sigma) {
    std::vector<ClassRecord> recs{record(0, Eigen::Vector2d(1, 0.05), sigma), record(1, Eigen::Vector2d(1, -0.05), sigma)};
    Rng rng = make_rng(2, Stream::kPrototypeNoise, 0);
    int ones = 0;
    for (int i = 0; i < 400; ++i) ones += classify(Eigen::Vector2d(1, 0.2), recs, &rng, true).label;
    return ones;
  };
  EXPECT_EQ(flips(1e-8), 0);
  EXPECT_GT(flips(0.5), 40);
}

}  // namespace
}  // namespace tfscil
