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

// Run directory layout written by run_experiment:
//
//   OUT/summary.csv               seed, per-session accuracy, AA, PD, ADR
//   OUT/seed_<s>/manifest.ini     the resolved config for this seed plus a
//                                 [log] section with per-epoch losses
//   OUT/seed_<s>/results.csv      row,session,classes_seen,accuracy_pct,aa,pd,adr
//   OUT/seed_<s>/curve.csv        session,classes_seen,accuracy_pct
//   OUT/seed_<s>/checkpoints/     base.ckpt, session_<l>.ckpt

#ifndef TFSCIL_EXPERIMENT_HPP_
#define TFSCIL_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "tfscil/checkpoint.hpp"
#include "tfscil/config.hpp"
#include "tfscil/gradcheck.hpp"

namespace tfscil {

Dataset load_data(const ExperimentConfig& cfg);

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<double> accuracies;  // fractions, session 0..S
  std::vector<int> classes_seen;
  Metrics metrics;                 // on percentages
  std::vector<EpochLog> log;
};

// Trained base networks and records, reusable by runs that differ only in
// incremental-stage settings.
class BaseCache {
 public:
  struct Entry {
    Checkpoint checkpoint;
    std::vector<EpochLog> log;
  };
  // Key covers everything the base stage depends on.
  static std::string key(const ExperimentConfig& cfg, std::uint64_t seed);
  std::shared_ptr<const Entry> find(const std::string& key) const;
  void put(const std::string& key, Entry entry);

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const Entry>> entries_;
};

// One seed of the protocol. Writes artifacts under `dir` when non-empty.
RunResult run_single(const ExperimentConfig& cfg, const Dataset& ds, std::uint64_t seed,
                     const std::filesystem::path& dir, BaseCache* cache = nullptr);

// All seeds of cfg; out must be absent or empty unless force.
std::vector<RunResult> run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out, bool force,
                                      bool parallel, std::ostream* progress = nullptr);

std::string results_csv(const RunResult& r);
std::string curve_csv(const RunResult& r);

struct ReportTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string text() const;
  std::string csv() const;
};

// Rows: every seed of every run directory, then one mean row per
// directory; delta_aa is the mean AA difference to the first directory.
ReportTable report(const std::vector<std::filesystem::path>& run_dirs);

struct GradCheckSummary {
  std::vector<std::pair<std::string, GradCheckReport>> checks;
  bool stop_gradient_distinguished = false;
  bool passed() const;
};

// Finite-difference checks of every loss on a 4-sample batch in double.
GradCheckSummary run_gradcheck(const ExperimentConfig& cfg, std::uint64_t seed, int probe_count);

// Invariant suites; prints one line per check. Returns true when all pass.
bool run_selftest(std::ostream& out);

}  // namespace tfscil

#endif  // TFSCIL_EXPERIMENT_HPP_
