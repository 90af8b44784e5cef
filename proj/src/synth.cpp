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

#include "tfscil/synth.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace tfscil {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kMaxAttempts = 1000;
constexpr int kTextureOrder = 3;

void normalize_unit_range(Spectrogram<double>& m) {
  const double lo = m.values.minCoeff(), hi = m.values.maxCoeff();
  if (hi - lo < 1e-12) {
    m.values.setZero();
    return;
  }
  m.values = (m.values - lo) * (2.0 / (hi - lo)) - 1.0;
}

// One candidate material: a 1/f-like floor shared by all materials, a
// material-specific low-order 2D Fourier texture, and Gaussian resonance
// bands with slow temporal modulation.
Spectrogram<double> draw_material(const SynthSpec& spec, Rng& rng) {
  const Index F = spec.mel_bins, T = spec.frames;
  Spectrogram<double> m(spec.channels, F, T);
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::ArrayXXd texture = Eigen::ArrayXXd::Zero(F, T);
  for (int p = 0; p <= kTextureOrder; ++p) {
    for (int q = 0; q <= kTextureOrder; ++q) {
      if (p == 0 && q == 0) continue;
      const double amp = 0.15 * normal(rng) / static_cast<double>(p + q);
      const double phase = uniform(rng, 0.0, 2.0 * kPi);
      for (Index f = 0; f < F; ++f) {
        for (Index t = 0; t < T; ++t) {
          const double arg = kPi * (p * double(f) / double(F - 1) + q * double(t) / double(T - 1));
          texture(f, t) += amp * std::cos(arg + phase);
        }
      }
    }
  }

  struct Band {
    double center, width, amp, depth, period, phase;
  };
  std::vector<Band> bands;
  for (int k = 0; k < spec.resonance_count; ++k) {
    Band b;
    b.center = uniform(rng, 0.1, 0.9) * double(F - 1);
    b.width = uniform(rng, 0.03, 0.09) * double(F);
    b.amp = uniform(rng, 0.6, 1.2);
    b.depth = uniform(rng, 0.0, 0.5);
    b.period = uniform(rng, 6.0, std::max(6.0, double(T)));
    b.phase = uniform(rng, 0.0, 2.0 * kPi);
    bands.push_back(b);
  }

  for (Index c = 0; c < spec.channels; ++c) {
    // Channels share the material structure with a small per-channel gain.
    const double gain = c == 0 ? 1.0 : uniform(rng, 0.7, 1.0);
    for (Index f = 0; f < F; ++f) {
      const double floor = -std::log1p(double(f));
      for (Index t = 0; t < T; ++t) {
        double v = 0.3 * floor + texture(f, t);
        for (const Band& b : bands) {
          const double z = (double(f) - b.center) / b.width;
          const double mod = 1.0 + b.depth * std::sin(2.0 * kPi * double(t) / b.period + b.phase);
          v += gain * b.amp * mod * std::exp(-0.5 * z * z);
        }
        m(c, f, t) = v;
      }
    }
  }
  normalize_unit_range(m);
  return m;
}

}  // namespace

void SynthSpec::validate(int min_materials) const {
  if (material_count < std::max(2, min_materials)) {
    throw std::invalid_argument("SynthSpec: material_count " + std::to_string(material_count) +
                                " below required " + std::to_string(std::max(2, min_materials)));
  }
  if (per_class_count < 1) throw std::invalid_argument("SynthSpec: per_class_count must be >= 1");
  if (resonance_count < 0) throw std::invalid_argument("SynthSpec: resonance_count must be >= 0");
  if (!(noise_std >= 0)) throw std::invalid_argument("SynthSpec: noise_std must be >= 0");
  if (channels < 1 || mel_bins < 2 || frames < 2) {
    throw std::invalid_argument("SynthSpec: need channels >= 1, mel_bins >= 2, frames >= 2");
  }
  if (!(min_separation >= 0)) throw std::invalid_argument("SynthSpec: min_separation must be >= 0");
  context_bounds.validate();
}

SynthCatalog::SynthCatalog(const SynthSpec& spec) : spec_(spec) {
  spec.validate();
  for (int id = 0; id < spec.material_count; ++id) {
    Rng rng = make_rng(spec.rng_seed, Stream::kMaterial, static_cast<std::uint64_t>(id));
    bool accepted = false;
    for (int attempt = 0; attempt < kMaxAttempts && !accepted; ++attempt) {
      Spectrogram<double> cand = draw_material(spec, rng);
      accepted = true;
      for (const auto& prev : items_) {
        if (l1_per_element(cand, prev) < spec.min_separation) {
          accepted = false;
          break;
        }
      }
      if (accepted) items_.push_back(std::move(cand));
    }
    if (!accepted) {
      throw std::runtime_error("SynthCatalog: could not place material " + std::to_string(id) +
                               " at separation " + std::to_string(spec.min_separation));
    }
  }
}

const Spectrogram<double>& SynthCatalog::canonical(int material_id) const {
  if (material_id < 0 || material_id >= size()) {
    throw std::out_of_range("SynthCatalog: material id " + std::to_string(material_id));
  }
  return items_[static_cast<std::size_t>(material_id)];
}

Spectrogram<double> synth_canonical(int material_id, const SynthSpec& spec) {
  if (material_id < 0 || material_id >= spec.material_count) {
    throw std::out_of_range("synth_canonical: material id " + std::to_string(material_id));
  }
  SynthSpec prefix = spec;
  prefix.material_count = std::max(2, material_id + 1);
  return SynthCatalog(prefix).canonical(material_id);
}

Spectrogram<double> synth_observe(const Spectrogram<double>& canonical, const ContextParams& c,
                                  double noise_std, Rng& rng) {
  Spectrogram<double> out = apply_transform(canonical, c);
  if (noise_std > 0) {
    std::normal_distribution<double> normal(0.0, noise_std);
    for (Index i = 0; i < out.size(); ++i) out.values[i] += normal(rng);
  }
  return out;
}

double spectral_flatness(const Spectrogram<double>& m) {
  double total = 0;
  for (Index c = 0; c < m.channels; ++c) {
    for (Index t = 0; t < m.frames; ++t) {
      double log_sum = 0, sum = 0;
      for (Index f = 0; f < m.mel_bins; ++f) {
        const double e = std::exp(m(c, f, t));
        log_sum += std::log(e);
        sum += e;
      }
      const double n = double(m.mel_bins);
      total += std::exp(log_sum / n) / (sum / n);
    }
  }
  return total / double(m.channels * m.frames);
}

SynthSample synth_sample(const SynthCatalog& catalog, int material_id, int index) {
  const SynthSpec& spec = catalog.spec();
  const auto counter = static_cast<std::uint64_t>(material_id) * 1000003ULL + static_cast<std::uint64_t>(index);
  Rng rng = make_rng(spec.rng_seed, Stream::kObservation, counter);
  SynthSample s;
  s.label = material_id;
  s.context = sample_pseudo_context(spec.context_bounds, rng);
  s.observed = synth_observe(catalog.canonical(material_id), s.context, spec.noise_std, rng);
  return s;
}

}  // namespace tfscil
