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
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "tfscil/binary_io.hpp"
#include "tfscil/experiment.hpp"

namespace tfscil {
namespace {

namespace fs = std::filesystem;

ExperimentConfig tiny() {
  ExperimentConfig cfg;
  cfg.name = "tiny";
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
  cfg.seeds = {1, 2};
  return cfg;
}

class ExperimentDir : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("tfscil_exp_") + info->name());
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

TEST_F(ExperimentDir, WritesPerSeedArtifacts) {
  const auto cfg = tiny();
  const auto results = run_experiment(cfg, dir_, false, false);
  ASSERT_EQ(results.size(), 2u);
  for (auto seed : cfg.seeds) {
    const fs::path sd = dir_ / ("seed_" + std::to_string(seed));
    for (const char* f : {"manifest.ini", "results.csv", "curve.csv", "checkpoints/base.ckpt",
                          "checkpoints/session_2.ckpt"}) {
      EXPECT_TRUE(fs::exists(sd / f)) << sd / f;
    }
    const auto rows = lines_of(sd / "results.csv");
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_EQ(rows[0], "row,session,classes_seen,accuracy_pct,aa,pd,adr");
    EXPECT_EQ(rows[1].rfind("session,0,4,", 0), 0u);
    EXPECT_EQ(rows[3].rfind("session,2,8,", 0), 0u);
    EXPECT_EQ(rows[4].rfind("summary,", 0), 0u);
    // The manifest is a loadable config describing this seed alone.
    auto again = load_config((sd / "manifest.ini").string());
    EXPECT_EQ(again.seeds, std::vector<std::uint64_t>{seed});
  }
  EXPECT_EQ(lines_of(dir_ / "summary.csv").size(), 3u);
}

TEST_F(ExperimentDir, RefusesNonEmptyOutputWithoutForce) {
  auto cfg = tiny();
  cfg.seeds = {1};
  run_experiment(cfg, dir_, false, false);
  EXPECT_THROW(run_experiment(cfg, dir_, false, false), std::runtime_error);
  EXPECT_NO_THROW(run_experiment(cfg, dir_, true, false));
}

TEST(Experiment, RepeatedRunsAreBitIdentical) {
  auto cfg = tiny();
  cfg.save_checkpoints = false;
  const Dataset ds = load_data(cfg);
  const auto a = run_single(cfg, ds, 5, {});
  const auto b = run_single(cfg, ds, 5, {});
  EXPECT_EQ(results_csv(a), results_csv(b));
  EXPECT_EQ(curve_csv(a), curve_csv(b));
}

TEST(Experiment, SharedBaseMatchesFreshTraining) {
  auto cfg = tiny();
  cfg.save_checkpoints = false;
  cfg.ablation.cat_loss = false;
  const Dataset ds = load_data(cfg);
  BaseCache cache;
  auto off = cfg;
  off.ablation.ucpc = false;
  run_single(off, ds, 3, {}, &cache);
  const auto cached = run_single(cfg, ds, 3, {}, &cache);
  const auto fresh = run_single(cfg, ds, 3, {});
  EXPECT_EQ(results_csv(cached), results_csv(fresh));
  EXPECT_EQ(BaseCache::key(cfg, 3), BaseCache::key(off, 3));
  EXPECT_NE(BaseCache::key(cfg, 3), BaseCache::key(cfg, 4));
}

TEST(Experiment, ParallelMatchesSerial) {
  auto cfg = tiny();
  cfg.save_checkpoints = false;
  const fs::path a = fs::temp_directory_path() / "tfscil_exp_serial";
  const fs::path b = fs::temp_directory_path() / "tfscil_exp_parallel";
  const auto serial = run_experiment(cfg, a, true, false);
  const auto parallel = run_experiment(cfg, b, true, true);
  for (std::size_t i = 0; i < serial.size(); ++i) EXPECT_EQ(results_csv(serial[i]), results_csv(parallel[i]));
  fs::remove_all(a);
  fs::remove_all(b);
}

void write_results(const fs::path& dir, const std::vector<double>& acc) {
  fs::create_directories(dir);
  std::ostringstream out;
  out << "row,session,classes_seen,accuracy_pct,aa,pd,adr\n";
  for (std::size_t s = 0; s < acc.size(); ++s) out << "session," << s << ',' << 5 * (s + 1) << ',' << acc[s] << ",,,\n";
  const Metrics m = metrics(acc);
  out << "summary,,,," << m.aa << ',' << m.pd << ',' << *m.adr << '\n';
  binio::write_file(dir / "results.csv", out.str());
}

TEST_F(ExperimentDir, ReportAveragesSeedsAndComparesRuns) {
  write_results(dir_ / "a" / "seed_1", {90, 80, 70});
  write_results(dir_ / "a" / "seed_2", {80, 70, 66});
  write_results(dir_ / "b" / "seed_1", {70, 60, 50});
  const auto t = report({dir_ / "a", dir_ / "b/"});
  ASSERT_EQ(t.rows.size(), 5u);
  const auto& mean_a = t.rows[3];
  const auto& mean_b = t.rows[4];
  EXPECT_EQ(mean_a[0], "a/mean");
  EXPECT_EQ(mean_b[0], "b/mean");
  EXPECT_EQ(mean_a[1], "85.00");
  EXPECT_EQ(mean_a[3], "68.00");
  // AA per seed: 80 and 72; sample std sqrt(32).
  EXPECT_EQ(mean_a[4], "76.00");
  EXPECT_EQ(mean_a[5], "5.66");
  EXPECT_EQ(mean_a[8], "0.00");
  EXPECT_EQ(mean_b[8], "-16.00");
  EXPECT_NE(t.text().find("a/seed_2"), std::string::npos);
  EXPECT_EQ(t.csv().substr(0, 4), "run,");
}

TEST_F(ExperimentDir, ReportSchemaErrorNamesTheFile) {
  fs::create_directories(dir_ / "bad");
  binio::write_file(dir_ / "bad" / "results.csv", "row,session\nsession,0\n");
  try {
    report({dir_ / "bad"});
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("results.csv"), std::string::npos) << e.what();
  }
  EXPECT_THROW(report({dir_ / "missing"}), std::runtime_error);
}

TEST(GradCheckRun, EveryLossPasses) {
  const auto summary = run_gradcheck(ExperimentConfig{}, 1, 12);
  for (const auto& [name, r] : summary.checks) EXPECT_TRUE(r.passed()) << name << " " << r.max_rel_error;
  EXPECT_TRUE(summary.stop_gradient_distinguished);
  EXPECT_TRUE(summary.passed());
}

TEST(SelfTest, AllChecksPass) {
  std::ostringstream out;
  EXPECT_TRUE(run_selftest(out)) << out.str();
  EXPECT_EQ(out.str().find("FAIL"), std::string::npos);
}

}  // namespace
}  // namespace tfscil
