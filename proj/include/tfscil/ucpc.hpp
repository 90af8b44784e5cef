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

// Uncertainty-conditioned prototype calibration.
//
// A novel class y with few-shot prototype mu_y and context uncertainty U_y
// gets the likelihood N(mu_y, sigma_y^2 I), sigma_y^2 = beta + alpha U_y,
// and the prior N(mu_p, sigma_p^2 I) fitted to the old prototypes. The
// posterior is
//
//   lambda     = sigma_p^-2 / (sigma_p^-2 + sigma_y^-2)
//   mu_ucpc    = (1 - lambda) mu_y + lambda mu_p
//   sigma_ucpc = 1 / (sigma_p^-2 + sigma_y^-2)       (a variance)

#ifndef TFSCIL_UCPC_HPP_
#define TFSCIL_UCPC_HPP_

#include <vector>

#include <Eigen/Dense>

#include "tfscil/rng.hpp"
#include "tfscil/spectrogram.hpp"
#include "tfscil/transform.hpp"

namespace tfscil {

struct ClassRecord {
  int id = 0;
  int session = 0;
  Eigen::VectorXd mu;       // raw prototype: mean of normalized support embeddings
  Eigen::VectorXd mu_ucpc;  // calibrated center
  double sigma_ucpc = 0.05; // calibrated isotropic variance
  double uncertainty = 0.0; // U_y, frozen at the introduction session
  double lambda = 0.0;      // shrinkage weight used at initialization

  friend bool operator==(const ClassRecord&, const ClassRecord&) = default;
};

struct PriorStats {
  Eigen::VectorXd mu_p;
  double sigma2_p = 1.0;
};

struct UncertaintyMap {
  double alpha = 1.0;
  double beta = 0.05;

  void validate() const;
  double variance(double u) const { return beta + alpha * u; }
  friend bool operator==(const UncertaintyMap&, const UncertaintyMap&) = default;
};

inline constexpr double kPriorVarianceFloor = 1e-6;

// Mean of the per-element l1 distances between each canonicalized
// perturbation and the canonicalized observation. Invariant to the order
// of `canonical_perturbed`.
template <typename Scalar>
double uncertainty_from(const std::vector<Spectrogram<Scalar>>& canonical_perturbed,
                        const Spectrogram<Scalar>& canonical_observed) {
  if (canonical_perturbed.empty()) throw std::invalid_argument("uncertainty_from: no perturbations");
  double total = 0;
  for (const auto& p : canonical_perturbed) total += double(l1_per_element(p, canonical_observed));
  return total / static_cast<double>(canonical_perturbed.size());
}

// u(x) with a canonicalizer mapping an (n, c, F, T) batch to its
// canonical batch: the pseudo-contexts are applied to `anchor`, and the
// perturbations and `observed` are canonicalized in one batch.
template <typename Scalar, typename Canonicalizer>
double sample_uncertainty(Canonicalizer&& canonicalize, const Spectrogram<Scalar>& anchor,
                          const Spectrogram<Scalar>& observed, const std::vector<ContextParams>& draws) {
  if (draws.empty()) throw std::invalid_argument("sample_uncertainty: n_ucpc must be >= 1");
  std::vector<Spectrogram<Scalar>> batch;
  batch.reserve(draws.size() + 1);
  for (const auto& c : draws) batch.push_back(apply_transform(anchor, c));
  batch.push_back(observed);
  const Tensor<Scalar> canon = canonicalize(stack(batch));
  std::vector<Spectrogram<Scalar>> perturbed;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    perturbed.push_back(Spectrogram<Scalar>::from_batch(canon, static_cast<Index>(i)));
  }
  return uncertainty_from(perturbed, Spectrogram<Scalar>::from_batch(canon, static_cast<Index>(draws.size())));
}

template <typename Scalar, typename Canonicalizer>
double sample_uncertainty(Canonicalizer&& canonicalize, const Spectrogram<Scalar>& anchor,
                          const Spectrogram<Scalar>& observed, int n_ucpc, const ContextBounds& bounds,
                          Rng& rng) {
  if (n_ucpc < 1) throw std::invalid_argument("sample_uncertainty: n_ucpc must be >= 1");
  std::vector<ContextParams> draws;
  for (int i = 0; i < n_ucpc; ++i) draws.push_back(sample_pseudo_context(bounds, rng));
  return sample_uncertainty(canonicalize, anchor, observed, draws);
}

double class_uncertainty(const std::vector<double>& support_us);

PriorStats prior_stats(const std::vector<ClassRecord>& old_records);

struct Posterior {
  Eigen::VectorXd center;
  double variance = 0;
  double lambda = 0;
};

Posterior shrink(const Eigen::VectorXd& mu_y, const PriorStats& prior, double sigma2_y);

struct Classification {
  int label = -1;             // class id
  Eigen::VectorXd probs;      // in record order
  Eigen::VectorXd logits;
};

// Cosine softmax against calibrated centers; stochastic mode draws
// mu_ucpc + sqrt(sigma_ucpc) * eta per class from rng. Ties go to the
// lowest class id.
Classification classify(const Eigen::VectorXd& z, const std::vector<ClassRecord>& records, Rng* rng,
                        bool stochastic);

}  // namespace tfscil

#endif  // TFSCIL_UCPC_HPP_
