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
#include <functional>
#include <set>

#include "tfscil/experiment.hpp"

namespace tfscil {

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.name = "selftest";
  cfg.synth.material_count = 8;
  cfg.synth.per_class_count = 8;
  cfg.synth.mel_bins = 16;
  cfg.synth.frames = 12;
  cfg.protocol.ways = 2;
  cfg.protocol.shots = 2;
  cfg.protocol.sessions = 2;
  cfg.embedder.widths = {4, 8};
  cfg.embedder.blocks_per_stage = 1;
  cfg.embedder.embedding_dim = 8;
  cfg.estimator.block_count = 1;
  cfg.estimator.base_width = 4;
  cfg.ucpc.n_ucpc = 2;
  cfg.schedules.pretrain.epochs = 2;
  cfg.schedules.full_base.epochs = 1;
  cfg.schedules.incremental.epochs = 3;
  cfg.save_checkpoints = false;
  return cfg;
}

bool metrics_oracle() {
  const Metrics m = metrics({80.0, 60.0, 40.0});
  const double adr = (20.0 / 80.0 + 20.0 / 60.0) / 3.0 * 100.0;
  return std::abs(m.aa - 60.0) < 1e-12 && std::abs(m.pd - 40.0) < 1e-12 && m.adr &&
         std::abs(*m.adr - adr) < 1e-9 && !metrics({50.0, 0.0}).adr;
}

bool transform_identity() {
  const Spectrogram<double> m = synth_canonical(0, SynthSpec{}).cast<double>();
  const auto out = apply_transform(m, ContextParams::identity());
  return (out.values - m.values).abs().maxCoeff() < 1e-12;
}

bool transform_roundtrip() {
  const Spectrogram<double> m = synth_canonical(1, SynthSpec{}).cast<double>();
  const ContextParams c{0.1, 1.1, 0.2, -0.1};
  const auto back = apply_inverse(apply_transform(m, c), c);
  return interior_l1(back, m, roundtrip_margins(c, m.mel_bins, m.frames)) < 0.05;
}

bool ledger_invariants() {
  std::vector<int> labels;
  for (int y = 0; y < 60; ++y) {
    for (int i = 0; i < 12; ++i) labels.push_back(y);
  }
  const SessionLedger ledger = build_sessions(labels, 60, ProtocolSpec{});
  ledger.check_invariants(ProtocolSpec{}.shots);
  // Cumulative evaluation: the session-s test set covers exactly the
  // classes seen so far.
  for (int s = 0; s < ledger.session_count(); ++s) {
    std::set<int> want, got;
    for (int y : ledger.classes_up_to(s)) want.insert(y);
    for (Index i : ledger.tests_up_to(s)) got.insert(labels[static_cast<std::size_t>(i)]);
    if (want != got) return false;
  }
  return ledger.session_count() == 10;
}

bool determinism() {
  const ExperimentConfig cfg = tiny_config();
  const Dataset ds = load_data(cfg);
  const auto a = run_single(cfg, ds, 3, {});
  const auto b = run_single(cfg, ds, 3, {});
  return results_csv(a) == results_csv(b) && a.accuracies.size() == 3;
}

bool frontend_frames() {
  MelConfig cfg;
  RawRecording rec;
  rec.sample_rate = cfg.sample_rate;
  rec.channels.push_back(Eigen::VectorXf::Random(1000));
  const auto spec = log_mel(rec, cfg);
  return spec.frames == (1000 - cfg.window_len) / cfg.hop_len + 1 && spec.mel_bins == cfg.mel_bins;
}

}  // namespace

bool run_selftest(std::ostream& out) {
  const std::vector<std::pair<const char*, std::function<bool()>>> checks{
      {"metrics", metrics_oracle},          {"transform_identity", transform_identity},
      {"transform_roundtrip", transform_roundtrip}, {"ledger", ledger_invariants},
      {"frontend_frames", frontend_frames}, {"determinism", determinism},
  };
  bool all = true;
  for (const auto& [name, fn] : checks) {
    bool ok = false;
    std::string why;
    try {
      ok = fn();
    } catch (const std::exception& e) {
      why = std::string(" (") + e.what() + ")";
    }
    out << (ok ? "PASS " : "FAIL ") << name << why << '\n';
    all = all && ok;
  }
  return all;
}

}  // namespace tfscil
