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

// Acceptance suite. Each criterion prints one PASS/FAIL line with the
// measured quantities; `tfscil_acceptance N` runs criterion N only.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "tfscil/binary_io.hpp"
#include "tfscil/experiment.hpp"

namespace tfscil {
namespace {

namespace fs = std::filesystem;

// Frozen tolerances.
constexpr double kMetricTol = 0.02;
constexpr double kAlgebraTol = 1e-10;
constexpr double kTolRoundtrip = 0.06;
constexpr double kRankThreshold = 0.8;
constexpr double kBayesTol = 1e-6;
constexpr double kScalingTol = 0.2;
constexpr double kAblationBudgetMin = 30.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = 0.5 * double(i + j);
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a), rb = ranks(b);
  const double n = double(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

double sample_std(const std::vector<double>& v) {
  const double n = double(v.size());
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (n - 1));
}

Outcome metric_oracle() {
  const Metrics cat = metrics({96.65, 92.27, 88.21, 86.54, 82.39, 78.74, 76.61, 74.85, 72.51, 70.96});
  const Metrics orco = metrics({93.25, 89.09, 85.93, 84.04, 80.82, 77.58, 76.09, 73.16, 70.86, 69.95});
  const bool ok = std::abs(cat.aa - 81.97) <= kMetricTol && std::abs(cat.pd - 25.69) <= kMetricTol && cat.adr &&
                  std::abs(*cat.adr - 3.03) <= kMetricTol && std::abs(orco.pd - 23.30) <= kMetricTol &&
                  std::abs(orco.aa - 80.08) <= kMetricTol;
  return {ok, "CaT AA " + fmt(cat.aa) + " PD " + fmt(cat.pd) + " ADR " + fmt(cat.adr.value_or(NAN)) + "; OrCo AA " +
                  fmt(orco.aa) + " PD " + fmt(orco.pd)};
}

Outcome transform_algebra() {
  Rng rng = make_rng(2024, Stream::kInit, 0);
  double identity = 0, group = 0, linear = 0, inverse = 0;
  const ContextBounds b;
  for (int trial = 0; trial < 1000; ++trial) {
    const Index c = 1 + trial % 2, f = 2 + trial % 31, t = 2 + (trial * 7) % 29;
    const auto random_map = [&] {
      Spectrogram<double> m(c, f, t);
      for (Index i = 0; i < m.size(); ++i) m.values[i] = uniform(rng, -5.0, 5.0);
      return m;
    };
    const auto m = random_map(), y = random_map();
    identity = std::max(identity, (apply_transform(m, ContextParams::identity()).values - m.values).abs().maxCoeff());

    const double b1 = uniform(rng, -1, 1), s1 = uniform(rng, -1, 1), b2 = uniform(rng, -1, 1), s2 = uniform(rng, -1, 1);
    group = std::max(group, (apply_amplitude(apply_amplitude(m, b1, s1), b2, s2).values -
                             apply_amplitude(m, b1 + b2, s1 + s2).values)
                                .abs()
                                .maxCoeff());

    const auto grid = make_grid<double>(sample_pseudo_context(b, rng), f, t);
    const double alpha = uniform(rng, -3, 3), beta = uniform(rng, -3, 3);
    Spectrogram<double> mix = m;
    mix.values = alpha * m.values + beta * y.values;
    linear = std::max(linear, (grid_sample(mix, grid).values -
                               (alpha * grid_sample(m, grid).values + beta * grid_sample(y, grid).values))
                                  .abs()
                                  .maxCoeff());

    const ContextParams amp{0.0, 1.0, b1, s1};
    inverse = std::max(inverse, (apply_inverse(apply_transform(m, amp), amp).values - m.values).abs().maxCoeff());
  }
  const bool ok = identity <= kAlgebraTol && group <= kAlgebraTol && linear <= kAlgebraTol && inverse <= kAlgebraTol;
  return {ok, "max errors: identity " + fmt(identity) + ", amplitude group " + fmt(group) + ", grid_sample linearity " +
                  fmt(linear) + ", amplitude inverse " + fmt(inverse) + " (1000 inputs)"};
}

Outcome invertibility() {
  const SynthCatalog catalog(SynthSpec{});
  Rng rng = make_rng(31, Stream::kInit, 0);
  std::vector<double> residual, shift, scale;
  for (int i = 0; i < 100; ++i) {
    const auto& m = catalog.canonical(i % catalog.size());
    const ContextParams c = sample_pseudo_context(ContextBounds{}, rng);
    const auto back = apply_inverse(apply_transform(m, c), c);
    residual.push_back(interior_l1(back, m, roundtrip_margins(c, m.mel_bins, m.frames)));
    shift.push_back(std::abs(c.delta));
    scale.push_back(std::abs(std::log(c.tau)));
  }
  const double worst = *std::max_element(residual.begin(), residual.end());
  const double rho_shift = spearman(residual, shift), rho_scale = spearman(residual, scale);
  const bool ok = worst <= kTolRoundtrip && rho_shift > kRankThreshold && rho_scale > kRankThreshold;
  return {ok, "max interior residual " + fmt(worst) + " (tol " + fmt(kTolRoundtrip) + "); Spearman vs |delta| " +
                  fmt(rho_shift, 3) + ", vs |log tau| " + fmt(rho_scale, 3) + " (need > " + fmt(kRankThreshold) + ")"};
}

Outcome gradient_integrity() {
  const auto summary = run_gradcheck(ExperimentConfig{}, 1, 40);
  std::string detail;
  for (const auto& [name, r] : summary.checks) detail += name + " " + fmt(r.max_rel_error, 2) + ", ";
  detail += std::string("stop-gradient dual oracle ") + (summary.stop_gradient_distinguished ? "distinguished" : "not distinguished");
  return {summary.passed(), detail};
}

// Posterior of a scalar mean under a N(mu_p, s2p) prior and one N(mu_y, s2y)
// observation, by composite Simpson integration over +-14 prior widths.
std::pair<double, double> grid_posterior(double mu_y, double mu_p, double s2y, double s2p) {
  const double lo = std::min(mu_y, mu_p) - 14 * std::sqrt(std::max(s2y, s2p));
  const double hi = std::max(mu_y, mu_p) + 14 * std::sqrt(std::max(s2y, s2p));
  const int n = 40000;
  const double h = (hi - lo) / n;
  double z = 0, m1 = 0, m2 = 0;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + h * i;
    const double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
    const double p = w * std::exp(-0.5 * (x - mu_p) * (x - mu_p) / s2p - 0.5 * (mu_y - x) * (mu_y - x) / s2y);
    z += p;
    m1 += p * x;
    m2 += p * x * x;
  }
  const double mean = m1 / z;
  return {mean, m2 / z - mean * mean};
}

Outcome bayes_oracle() {
  Rng rng = make_rng(55, Stream::kInit, 0);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const double mu_y = uniform(rng, -2, 2), mu_p = uniform(rng, -2, 2);
    const double s2y = std::exp(uniform(rng, std::log(0.01), std::log(2.0)));
    const double s2p = std::exp(uniform(rng, std::log(0.01), std::log(2.0)));
    PriorStats prior{Eigen::VectorXd::Constant(1, mu_p), s2p};
    const Posterior post = shrink(Eigen::VectorXd::Constant(1, mu_y), prior, s2y);
    const auto [mean, var] = grid_posterior(mu_y, mu_p, s2y, s2p);
    worst = std::max({worst, std::abs(post.center[0] - mean), std::abs(post.variance - var)});
  }
  bool monotone = true;
  PriorStats prior{Eigen::VectorXd::Zero(1), 0.3};
  double prev = -1;
  for (double s2y = 1e-3; s2y < 1e3; s2y *= 1.3) {
    const double lambda = shrink(Eigen::VectorXd::Ones(1), prior, s2y).lambda;
    monotone = monotone && lambda > prev && lambda > 0 && lambda < 1;
    prev = lambda;
  }
  prev = 2;
  for (double s2p = 1e-3; s2p < 1e3; s2p *= 1.3) {
    const double lambda = shrink(Eigen::VectorXd::Ones(1), PriorStats{Eigen::VectorXd::Zero(1), s2p}, 0.3).lambda;
    monotone = monotone && lambda < prev;
    prev = lambda;
  }
  return {worst <= kBayesTol && monotone, "max |shrink - grid| " + fmt(worst, 3) + " over 100 tuples; lambda sweep " +
                                             (monotone ? "monotone" : "NOT monotone")};
}

// Canonicalizes every item of a stacked batch with its true context.
struct OracleCanonicalizer {
  std::vector<ContextParams> contexts;
  Tensor<double> operator()(const Tensor<double>& batch) const {
    std::vector<Spectrogram<double>> out;
    for (std::size_t i = 0; i < contexts.size(); ++i) {
      out.push_back(apply_inverse(Spectrogram<double>::from_batch(batch, static_cast<Index>(i)), contexts[i]));
    }
    return stack(out);
  }
};

double oracle_uncertainty(const Spectrogram<double>& canonical, const ContextParams& c, int n, Rng& rng) {
  std::vector<ContextParams> draws;
  for (int k = 0; k < n; ++k) draws.push_back(sample_pseudo_context(ContextBounds{}, rng));
  OracleCanonicalizer oracle{draws};
  oracle.contexts.push_back(c);
  return sample_uncertainty(oracle, canonical, apply_transform(canonical, c), draws);
}

Outcome uncertainty_behavior() {
  const SynthCatalog catalog(SynthSpec{});
  Rng rng = make_rng(77, Stream::kUncertainty, 0);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const ContextParams c = sample_pseudo_context(ContextBounds{}, rng);
    worst = std::max(worst, oracle_uncertainty(catalog.canonical(i % catalog.size()), c, 20, rng));
  }
  const auto& m = catalog.canonical(0);
  const ContextParams c{0.05, 1.07, 0.1, -0.05};
  const int reps = 400;
  std::vector<double> scaled;
  std::string detail;
  for (int n : {5, 20, 80}) {
    std::vector<double> us;
    for (int r = 0; r < reps; ++r) us.push_back(oracle_uncertainty(m, c, n, rng));
    const double sd = sample_std(us);
    scaled.push_back(sd * std::sqrt(double(n)));
    detail += " n=" + std::to_string(n) + " std " + fmt(sd, 3);
  }
  bool scaling = true;
  for (double s : scaled) scaling = scaling && std::abs(s / scaled.front() - 1.0) <= kScalingTol;
  return {worst <= kTolRoundtrip && scaling,
          "max oracle u " + fmt(worst) + " (tol " + fmt(kTolRoundtrip) + ");" + detail + "; std*sqrt(n) ratios " +
              fmt(scaled[1] / scaled[0], 3) + ", " + fmt(scaled[2] / scaled[0], 3)};
}

Outcome synthetic_ablation() {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig bench = load_config(TFSCIL_CONFIG_DIR "/ablation_bench.cfg");
  struct Arm {
    const char* name;
    AblationSwitches sw;
  };
  const std::vector<Arm> arms{{"full", {true, true, true}},
                              {"cat+ucpc", {true, false, true}},
                              {"cat", {true, false, false}},
                              {"off", {false, false, false}}};
  const Dataset ds = load_data(bench);
  BaseCache cache;
  std::vector<double> mean, sd;
  std::string detail;
  for (const auto& arm : arms) {
    ExperimentConfig cfg = bench;
    cfg.ablation = arm.sw;
    cfg.save_checkpoints = false;
    cfg.validate();
    std::vector<double> aa;
    for (auto seed : cfg.seeds) aa.push_back(run_single(cfg, ds, seed, {}, &cache).metrics.aa);
    mean.push_back(std::accumulate(aa.begin(), aa.end(), 0.0) / double(aa.size()));
    sd.push_back(sample_std(aa));
    detail += std::string(arm.name) + " " + fmt(mean.back(), 4) + "+-" + fmt(sd.back(), 3) + ", ";
  }
  bool ordered = true;
  for (std::size_t i = 0; i + 1 < arms.size(); ++i) {
    ordered = ordered && mean[i] - mean[i + 1] > std::max(sd[i], sd[i + 1]);
  }
  const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 60.0;
  detail += "runtime " + fmt(minutes, 3) + " min";
  return {ordered && minutes < kAblationBudgetMin, "mean AA " + detail};
}

Outcome protocol_bookkeeping() {
  std::ostringstream out;
  const bool ok = run_selftest(out);
  std::string lines = out.str();
  std::replace(lines.begin(), lines.end(), '\n', ';');
  return {ok, lines};
}

Outcome frontend_checks() {
  MelConfig cfg;
  bool frames = true;
  Rng rng = make_rng(9, Stream::kInit, 0);
  const auto noise = [&](Index len) {
    RawRecording r;
    r.sample_rate = cfg.sample_rate;
    Eigen::VectorXf x(len);
    for (Index i = 0; i < len; ++i) x[i] = static_cast<float>(uniform(rng, -1, 1));
    r.channels.push_back(x);
    return r;
  };
  for (Index len = cfg.window_len; len < 1200; len += 37) {
    frames = frames && log_mel(noise(len), cfg).frames == (len - cfg.window_len) / cfg.hop_len + 1;
  }

  const RawRecording full = noise(1000);
  RawRecording shifted = full;
  shifted.channels[0] = full.channels[0].segment(cfg.hop_len, 1000 - cfg.hop_len);
  const auto a = log_mel(full, cfg), b = log_mel(shifted, cfg);
  double cov = 0;
  for (Index f = 0; f < a.mel_bins; ++f) {
    for (Index t = 0; t < b.frames; ++t) cov = std::max(cov, std::abs(a(0, f, t + 1) - b(0, f, t)));
  }

  RawRecording silent = full;
  silent.channels[0].setZero();
  const double floor_err = (log_mel(silent, cfg).values - std::log(kLogFloor)).abs().maxCoeff();

  const fs::path dir = fs::temp_directory_path() / "tfscil_acceptance_frontend";
  fs::remove_all(dir);
  const auto slices = slice_signal(noise(2600), 0.5);
  DatasetManifest manifest;
  manifest.kind = RecordKind::kRaw;
  manifest.record_count = static_cast<Index>(slices.slices.size());
  manifest.class_count = 1;
  const auto records = to_records(slices.slices);
  write_dataset(dir / "a", manifest, records, nullptr, false);
  const DatasetFiles back = read_dataset(dir / "a");
  write_dataset(dir / "b", back.manifest, back.records, nullptr, false);
  bool bytes_equal = back.records == records && back.manifest == manifest;
  int files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
    if (!e.is_regular_file()) continue;
    ++files;
    bytes_equal = bytes_equal && binio::read_file(e.path()) == binio::read_file(dir / "b" / fs::relative(e.path(), dir / "a"));
  }
  bytes_equal = bytes_equal && files == 1 + manifest.record_count;
  fs::remove_all(dir);

  const bool ok = frames && cov < 1e-9 && floor_err < 1e-12 && bytes_equal;
  return {ok, std::string("frame formula ") + (frames ? "ok" : "WRONG") + "; hop-shift max diff " + fmt(cov, 3) +
                  "; zero-signal floor err " + fmt(floor_err, 3) + "; file round trip " +
                  (bytes_equal ? "bit-exact" : "DIFFERS")};
}

}  // namespace
}  // namespace tfscil

int main(int argc, char** argv) {
  using namespace tfscil;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"metric oracle", metric_oracle},
      {"transform algebra", transform_algebra},
      {"approximate invertibility", invertibility},
      {"gradient integrity", gradient_integrity},
      {"Bayes oracle", bayes_oracle},
      {"uncertainty behavior", uncertainty_behavior},
      {"synthetic ablation", synthetic_ablation},
      {"protocol bookkeeping", protocol_bookkeeping},
      {"frontend checks", frontend_checks},
  };
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::stoi(argv[i]));
  if (which.empty()) {
    for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) which.push_back(i);
  }
  bool all = true;
  for (int k : which) {
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::cerr << "no criterion " << k << '\n';
      return 2;
    }
    const auto& [name, fn] = criteria[static_cast<std::size_t>(k - 1)];
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << k << " (" << name << "): " << o.detail << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
