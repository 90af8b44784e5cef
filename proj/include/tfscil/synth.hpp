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

#ifndef TFSCIL_SYNTH_HPP_
#define TFSCIL_SYNTH_HPP_

#include <cstdint>
#include <vector>

#include "tfscil/rng.hpp"
#include "tfscil/spectrogram.hpp"
#include "tfscil/transform.hpp"

namespace tfscil {

// Desk-scale tactile materials generated directly as spectrograms.
struct SynthSpec {
  int material_count = 40;
  int per_class_count = 30;
  int resonance_count = 3;
  double noise_std = 0.05;
  ContextBounds context_bounds;
  std::uint64_t rng_seed = 7;
  Index channels = 1;
  Index mel_bins = 32;
  Index frames = 24;
  // Every material is at least this far (mean per-element l1) from all
  // materials generated before it.
  double min_separation = 0.05;

  // Throws unless material_count >= min_materials.
  void validate(int min_materials = 2) const;
  friend bool operator==(const SynthSpec&, const SynthSpec&) = default;
};

// Canonical spectrograms of every material, values in [-1, 1].
class SynthCatalog {
 public:
  explicit SynthCatalog(const SynthSpec& spec);

  const Spectrogram<double>& canonical(int material_id) const;
  int size() const { return static_cast<int>(items_.size()); }
  const SynthSpec& spec() const { return spec_; }
  // Lower bound on the pairwise mean l1 distance, guaranteed by rejection.
  double separation_floor() const { return spec_.min_separation; }

 private:
  SynthSpec spec_;
  std::vector<Spectrogram<double>> items_;
};

// Deterministic in (material_id, spec). Builds the catalog prefix, so bulk
// callers should hold a SynthCatalog instead.
Spectrogram<double> synth_canonical(int material_id, const SynthSpec& spec);

// apply_transform(canonical, c) plus i.i.d. N(0, noise_std^2) per cell.
Spectrogram<double> synth_observe(const Spectrogram<double>& canonical, const ContextParams& c,
                                  double noise_std, Rng& rng);

// Per-frame spectral flatness of exp(values): geometric over arithmetic
// mean across mel bins, averaged over channels and frames.
double spectral_flatness(const Spectrogram<double>& m);

struct SynthSample {
  Spectrogram<double> observed;
  ContextParams context;
  int label = 0;
};

// Observation `index` of `material_id`, drawn from its own counter-derived
// stream so any subset can be generated independently.
SynthSample synth_sample(const SynthCatalog& catalog, int material_id, int index);

}  // namespace tfscil

#endif  // TFSCIL_SYNTH_HPP_
