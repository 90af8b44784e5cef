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

#include <random>

#include "tfscil/experiment.hpp"

namespace tfscil {

namespace {

NamedParams named(NetState<double>& net) {
  NamedParams out;
  for (const auto& [n, p] : net.params()) out.emplace_back(n, p);
  return out;
}

void randomize(Tensor<double>& t, double sd, Rng& rng) {
  std::normal_distribution<double> normal(0.0, sd);
  for (Index i = 0; i < t.size(); ++i) t[i] = normal(rng);
}

}  // namespace

bool GradCheckSummary::passed() const {
  for (const auto& [_, r] : checks) {
    if (!r.passed()) return false;
  }
  return stop_gradient_distinguished && !checks.empty();
}

GradCheckSummary run_gradcheck(const ExperimentConfig& cfg, std::uint64_t seed, int probe_count) {
  constexpr int kBatch = 4;
  SynthSpec spec = cfg.synth;
  spec.material_count = kBatch;
  const SynthCatalog catalog(spec);
  const InputShape input{spec.channels, spec.mel_bins, spec.frames};
  Tensor<double> maps({kBatch, input.channels, input.mel_bins, input.frames});
  std::vector<int> labels;
  for (int m = 0; m < kBatch; ++m) {
    const auto s = synth_sample(catalog, m, 0);
    maps.data.segment(m * s.observed.size(), s.observed.size()) = s.observed.values.cast<double>();
    labels.push_back(m);
  }

  // Small networks keep every finite-difference evaluation cheap.
  EmbedderConfig emb;
  emb.widths = {4, 8};
  emb.blocks_per_stage = 1;
  emb.embedding_dim = 8;
  EstimatorConfig est;
  est.block_count = 1;
  est.base_width = 4;
  Model<double> model(emb, est, cfg.bounds, input, true, seed);
  // A zero head puts every warp exactly on the sampling grid, where
  // bilinear interpolation is not differentiable.
  Rng init = make_rng(seed, Stream::kInit, 0x9d);
  randomize(model.estimator().head().weight->value, 0.3, init);
  randomize(model.estimator().head().bias->value, 0.3, init);

  GradCheckOptions opt;
  opt.probe_count = probe_count;
  opt.seed = seed;
  GradCheckSummary out;
  NamedParams all = named(model.estimator().state());
  for (auto& p : named(model.embedder().state())) all.push_back(p);
  const NamedParams est_params = named(model.estimator().state());
  const auto x = ad::constant(maps);

  {
    NetState<double> head_state;
    Linear<double> linear(head_state, "head", emb.embedding_dim, kBatch, false, init);
    NamedParams params = all;
    for (auto& p : named(head_state)) params.push_back(p);
    const LossWeights none{0, 0, 0};
    out.checks.emplace_back("pretrain_ce", grad_check(params, [&] {
      Rng rng = make_rng(seed, Stream::kPseudoContext, 0);
      return loss_base<double>(model, maps, labels, [&](const ad::Var<double>& z) { return linear(z); }, none, false,
                               cfg.bounds, rng, true).total;
    }, opt));
  }
  {
    Tensor<double> p0({kBatch, emb.embedding_dim});
    randomize(p0, 1.0, init);
    auto protos = ad::parameter(std::move(p0));
    NamedParams params = all;
    params.emplace_back("prototypes", protos);
    const auto head = [&](const ad::Var<double>& z) { return ad::cosine_logits(z, protos); };
    // Numeric side: the same total with the L_cat anchor held at its
    // current value, which is what the stop-gradient differentiates.
    const auto anchor = ad::detach(model.estimator().canonicalize(x, true));
    out.checks.emplace_back("base_total", grad_check(params, [&] {
      Rng rng = make_rng(seed, Stream::kPseudoContext, 1);
      return loss_base<double>(model, maps, labels, head, cfg.weights, true, cfg.bounds, rng, true).total;
    }, [&] {
      Rng rng = make_rng(seed, Stream::kPseudoContext, 1);
      auto rest = loss_base<double>(model, maps, labels, head, cfg.weights, false, cfg.bounds, rng, true).total;
      Rng same = make_rng(seed, Stream::kPseudoContext, 1);
      auto cat = loss_cat(model.estimator(), x, cfg.bounds, same, 1, true, anchor, true);
      return ad::weighted_sum<double>({{rest, 1.0}, {cat, cfg.weights.cat}});
    }, opt));
  }
  const auto cat_loss = [&](ad::Var<double> anchor, bool stop_gradient) {
    Rng rng = make_rng(seed, Stream::kPseudoContext, 2);
    return loss_cat(model.estimator(), x, cfg.bounds, rng, 2, true, anchor, stop_gradient);
  };
  out.checks.emplace_back("cat_both_branches", grad_check(est_params, [&] { return cat_loss(nullptr, false); }, opt));
  out.checks.emplace_back("reg", grad_check(est_params, [&] { return loss_reg(model.forward(x, true).context); }, opt));

  // Stop-gradient: the analytic gradient must equal a finite difference
  // that holds the anchor fixed, and differ from one that moves it.
  const auto frozen = ad::detach(model.estimator().canonicalize(x, true));
  out.checks.emplace_back("cat_stop_gradient", grad_check(est_params, [&] { return cat_loss(frozen, true); }, opt));
  const auto moving = grad_check(est_params, [&] { return cat_loss(nullptr, true); }, opt);
  out.stop_gradient_distinguished = moving.max_rel_error > 10 * opt.threshold;

  {
    const Index d = emb.embedding_dim;
    const int k = 6, fresh = 2;
    Tensor<double> c0({k, d}), s0({k}), noise({k, d}), old({k - fresh, d}), new_z({kBatch, d});
    randomize(c0, 1.0, init);
    randomize(s0, 1.0, init);
    randomize(noise, 1.0, init);
    randomize(old, 1.0, init);
    randomize(new_z, 1.0, init);
    auto centers = ad::parameter(std::move(c0));
    auto raw_sigma = ad::parameter(std::move(s0));
    const std::vector<Index> new_rows{k - fresh, k - fresh + 1};
    const std::vector<int> new_labels{0, 1, 0, 1};
    std::vector<int> old_labels(k - fresh);
    for (int i = 0; i < k - fresh; ++i) old_labels[static_cast<std::size_t>(i)] = i;
    const double lambda3 = cfg.weights.old > 0 ? cfg.weights.old : 1.0;
    out.checks.emplace_back("incremental", grad_check({{"centers", centers}, {"raw_sigma", raw_sigma}}, [&] {
      return loss_incremental<double>(new_z, new_labels, new_rows, old, old_labels, centers, ad::softplus(raw_sigma),
                                      &noise, lambda3).total;
    }, opt));
  }
  return out;
}

}  // namespace tfscil
