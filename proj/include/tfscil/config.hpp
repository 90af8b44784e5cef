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

#ifndef TFSCIL_CONFIG_HPP_
#define TFSCIL_CONFIG_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tfscil/frontend.hpp"
#include "tfscil/harness.hpp"
#include "tfscil/nets.hpp"
#include "tfscil/synth.hpp"
#include "tfscil/training.hpp"

namespace tfscil {

enum class DataSource { kSynthetic, kDirectory };

struct ExperimentConfig {
  std::string name = "experiment";
  DataSource source = DataSource::kSynthetic;
  std::string data_path;  // directory source only
  // Enough materials for the default 5-way, 9-session protocol.
  SynthSpec synth = [] {
    SynthSpec s;
    s.material_count = 60;
    return s;
  }();
  MelConfig mel;
  ContextBounds bounds;   // pseudo-contexts and estimator range
  EstimatorConfig estimator;
  EmbedderConfig embedder;
  UcpcSettings ucpc;
  LossWeights weights;
  TrainSchedules schedules;
  ProtocolSpec protocol;
  AblationSwitches ablation;
  std::vector<std::uint64_t> seeds{1};
  bool reseed_splits = false;
  bool save_checkpoints = true;

  // Throws ConfigError naming the offending field.
  void validate() const;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Unknown sections or keys are errors; missing keys take defaults.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace tfscil

#endif  // TFSCIL_CONFIG_HPP_
