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

#ifndef TFSCIL_GRADCHECK_HPP_
#define TFSCIL_GRADCHECK_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "tfscil/autodiff.hpp"
#include "tfscil/rng.hpp"

namespace tfscil {

struct GradProbe {
  std::string param;
  Index index = 0;
  double analytic = 0;
  double numeric = 0;
  double rel_error = 0;
};

struct GradCheckReport {
  std::vector<GradProbe> probes;
  double threshold = 1e-3;
  double max_rel_error = 0;
  bool passed() const { return max_rel_error <= threshold; }
};

struct GradCheckOptions {
  int probe_count = 20;
  double step = 1e-6;
  double threshold = 1e-3;
  // Denominator floor: gradients below it are compared absolutely.
  double floor = 1e-6;
  std::uint64_t seed = 1;
};

using NamedParams = std::vector<std::pair<std::string, ad::Var<double>>>;

// |a - n| / max(|a|, |n|, floor) per probe. Probes pick a parameter
// tensor uniformly, then an element uniformly.
// `analytic_fn` supplies the gradient, `numeric_fn` the finite
// differences; they differ when the loss holds a stop-gradient whose
// numeric counterpart must keep the stopped branch fixed.
inline GradCheckReport grad_check(const NamedParams& params, const std::function<ad::Var<double>()>& analytic_fn,
                                  const std::function<ad::Var<double>()>& numeric_fn,
                                  const GradCheckOptions& opt = {}) {
  GradCheckReport report;
  report.threshold = opt.threshold;
  if (params.empty()) return report;
  for (const auto& [_, p] : params) p->zero_grad();
  ad::backward(analytic_fn());
  const auto& loss_fn = numeric_fn;

  Rng rng = make_rng(opt.seed, Stream::kInit, 0x9c);
  for (int k = 0; k < opt.probe_count; ++k) {
    const auto pi = static_cast<std::size_t>(std::uniform_int_distribution<std::size_t>(0, params.size() - 1)(rng));
    const auto& [name, p] = params[pi];
    const Index idx = std::uniform_int_distribution<Index>(0, p->value.size() - 1)(rng);
    GradProbe probe;
    probe.param = name;
    probe.index = idx;
    probe.analytic = p->has_grad() ? p->grad[idx] : 0.0;
    const double saved = p->value[idx];
    p->value[idx] = saved + opt.step;
    const double up = loss_fn()->value[0];
    p->value[idx] = saved - opt.step;
    const double down = loss_fn()->value[0];
    p->value[idx] = saved;
    probe.numeric = (up - down) / (2.0 * opt.step);
    const double denom = std::max({std::abs(probe.analytic), std::abs(probe.numeric), opt.floor});
    probe.rel_error = std::abs(probe.analytic - probe.numeric) / denom;
    report.max_rel_error = std::max(report.max_rel_error, probe.rel_error);
    report.probes.push_back(probe);
  }
  return report;
}

inline GradCheckReport grad_check(const NamedParams& params, const std::function<ad::Var<double>()>& loss_fn,
                                  const GradCheckOptions& opt = {}) {
  return grad_check(params, loss_fn, loss_fn, opt);
}

}  // namespace tfscil

#endif  // TFSCIL_GRADCHECK_HPP_
