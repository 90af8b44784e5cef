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

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tfscil/binary_io.hpp"
#include "tfscil/experiment.hpp"

namespace {

tfscil::ExperimentConfig resolve(const std::string& path, const std::optional<std::uint64_t>& seed) {
  tfscil::ExperimentConfig cfg = path.empty() ? tfscil::ExperimentConfig{} : tfscil::load_config(path);
  if (seed) cfg.seeds = {*seed};
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Context-aware few-shot class-incremental learning for spectrogram data"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool force = false;
  bool parallel = false;
  std::vector<std::string> run_dirs;
  int probes = 20;
  bool verbose = false;

  auto* gen = app.add_subcommand("gen", "write a synthetic dataset directory");
  gen->add_option("--config", config, "experiment config; its [synth] section is used");
  gen->add_option("--seed", seed, "override the synthetic generator seed");
  gen->add_option("--out", out, "dataset directory")->required();
  gen->add_flag("--force", force, "replace a non-empty output directory");

  auto* run = app.add_subcommand("run", "run the incremental protocol for every seed");
  run->add_option("--config", config, "experiment config")->required();
  run->add_option("--seed", seed, "run this seed only");
  run->add_option("--out", out, "run directory")->required();
  run->add_flag("--force", force, "replace a non-empty output directory");
  run->add_flag("--parallel", parallel, "run seeds concurrently");

  auto* rep = app.add_subcommand("report", "compare run directories");
  rep->add_option("dirs", run_dirs, "run directories")->required();
  rep->add_option("--out", out, "also write the table as CSV to this file");
  rep->add_flag("--force", force, "overwrite an existing CSV");

  auto* grad = app.add_subcommand("gradcheck", "finite-difference check of every loss");
  grad->add_option("--config", config, "experiment config");
  grad->add_option("--seed", seed, "probe and initialization seed");
  grad->add_option("--probes", probes, "probes per loss")->check(CLI::PositiveNumber);
  grad->add_flag("--verbose", verbose, "print every probe");

  auto* self = app.add_subcommand("selftest", "run the invariant suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      auto cfg = resolve(config, std::nullopt);
      if (seed) cfg.synth.rng_seed = *seed;
      tfscil::gen_dataset(cfg.synth, out, force);
      std::cout << "wrote " << cfg.synth.material_count * cfg.synth.per_class_count << " records to " << out << '\n';
    } else if (*run) {
      const auto cfg = resolve(config, seed);
      const auto results = tfscil::run_experiment(cfg, out, force, parallel, &std::cout);
      std::vector<std::filesystem::path> dirs{out};
      std::cout << tfscil::report(dirs).text();
    } else if (*rep) {
      std::vector<std::filesystem::path> dirs(run_dirs.begin(), run_dirs.end());
      const auto table = tfscil::report(dirs);
      std::cout << table.text();
      if (!out.empty()) {
        if (std::filesystem::exists(out) && !force) throw std::runtime_error(out + " exists (use --force)");
        tfscil::binio::write_file(out, table.csv());
      }
    } else if (*grad) {
      const auto cfg = resolve(config, std::nullopt);
      const auto summary = tfscil::run_gradcheck(cfg, seed.value_or(1), probes);
      for (const auto& [name, r] : summary.checks) {
        std::cout << (r.passed() ? "PASS " : "FAIL ") << name << " max_rel_error=" << r.max_rel_error << '\n';
        if (verbose) {
          for (const auto& p : r.probes) {
            std::cout << "  " << p.param << "[" << p.index << "] analytic=" << p.analytic << " numeric=" << p.numeric
                      << " rel=" << p.rel_error << '\n';
          }
        }
      }
      std::cout << (summary.stop_gradient_distinguished ? "PASS " : "FAIL ") << "stop_gradient_dual_oracle\n";
      return summary.passed() ? 0 : 1;
    } else if (*self) {
      return tfscil::run_selftest(std::cout) ? 0 : 1;
    }
  } catch (const tfscil::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const tfscil::TrainingAborted& e) {
    std::cerr << "training aborted: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
