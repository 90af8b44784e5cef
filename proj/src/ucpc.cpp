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

#include "tfscil/ucpc.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace tfscil {

void UncertaintyMap::validate() const {
  if (!(alpha > 0 && beta > 0)) throw std::invalid_argument("UncertaintyMap: need alpha > 0 and beta > 0");
}

double class_uncertainty(const std::vector<double>& support_us) {
  if (support_us.empty()) throw std::invalid_argument("class_uncertainty: empty support");
  return std::accumulate(support_us.begin(), support_us.end(), 0.0) / static_cast<double>(support_us.size());
}

PriorStats prior_stats(const std::vector<ClassRecord>& old_records) {
  if (old_records.size() < 2) throw std::invalid_argument("prior_stats: need at least 2 old classes");
  const Eigen::Index d = old_records.front().mu.size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(old_records.size()), d);
  for (std::size_t i = 0; i < old_records.size(); ++i) {
    if (old_records[i].mu.size() != d) throw std::invalid_argument("prior_stats: prototype dims differ");
    m.row(static_cast<Eigen::Index>(i)) = old_records[i].mu.transpose();
  }
  PriorStats p;
  p.mu_p = m.colwise().mean().transpose();
  // Population variance per dimension, averaged over dimensions.
  const double var = (m.rowwise() - p.mu_p.transpose()).array().square().colwise().mean().mean();
  p.sigma2_p = std::max(var, kPriorVarianceFloor);
  return p;
}

Posterior shrink(const Eigen::VectorXd& mu_y, const PriorStats& prior, double sigma2_y) {
  if (!(sigma2_y > 0) || !(prior.sigma2_p > 0)) throw std::invalid_argument("shrink: variances must be positive");
  if (mu_y.size() != prior.mu_p.size()) throw std::invalid_argument("shrink: dimension mismatch");
  const double prec_p = 1.0 / prior.sigma2_p, prec_y = 1.0 / sigma2_y;
  Posterior post;
  post.lambda = prec_p / (prec_p + prec_y);
  post.center = (1.0 - post.lambda) * mu_y + post.lambda * prior.mu_p;
  post.variance = 1.0 / (prec_p + prec_y);
  return post;
}

Classification classify(const Eigen::VectorXd& z, const std::vector<ClassRecord>& records, Rng* rng,
                        bool stochastic) {
  if (records.empty()) throw std::invalid_argument("classify: no class records");
  if (!z.allFinite()) throw std::invalid_argument("classify: non-finite embedding");
  const double zn = z.norm();
  if (!(zn > 0)) throw std::invalid_argument("classify: zero-norm embedding");
  if (stochastic && !rng) throw std::invalid_argument("classify: stochastic mode needs an rng");
  std::normal_distribution<double> normal(0.0, 1.0);

  const auto k = static_cast<Eigen::Index>(records.size());
  Classification out;
  out.logits.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const ClassRecord& r = records[static_cast<std::size_t>(i)];
    if (r.mu_ucpc.size() != z.size()) throw std::invalid_argument("classify: prototype dimension mismatch");
    Eigen::VectorXd proto = r.mu_ucpc;
    if (stochastic) {
      const double sd = std::sqrt(r.sigma_ucpc);
      for (Eigen::Index j = 0; j < proto.size(); ++j) proto[j] += sd * normal(*rng);
    }
    const double pn = proto.norm();
    out.logits[i] = pn > 0 ? z.dot(proto) / (zn * pn) : 0.0;
  }
  const double top = out.logits.maxCoeff();
  out.probs = (out.logits.array() - top).exp().matrix();
  out.probs /= out.probs.sum();
  for (Eigen::Index i = 0; i < k; ++i) {
    const int id = records[static_cast<std::size_t>(i)].id;
    if (out.logits[i] == top && (out.label < 0 || id < out.label)) out.label = id;
  }
  return out;
}

}  // namespace tfscil
