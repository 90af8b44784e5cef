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
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "tfscil/frontend.hpp"
#include "tfscil/rng.hpp"

namespace tfscil {
namespace {

RawRecording tone(Index len, double hz, double sr = 1000.0) {
  RawRecording r;
  r.sample_rate = sr;
  Eigen::VectorXf x(len);
  for (Index n = 0; n < len; ++n) x[n] = static_cast<float>(std::sin(2.0 * std::numbers::pi * hz * double(n) / sr));
  r.channels.push_back(x);
  return r;
}

TEST(FrameCount, MatchesFloorFormula) {
  MelConfig cfg;
  for (Index len : {128, 129, 143, 144, 500, 1000, 4096}) {
    EXPECT_EQ(cfg.frame_count(len), (len - cfg.window_len) / cfg.hop_len + 1) << len;
    EXPECT_EQ(log_mel(tone(len, 50.0), cfg).frames, cfg.frame_count(len));
  }
}

TEST(LogMel, ShorterThanWindowThrows) {
  MelConfig cfg;
  EXPECT_THROW(log_mel(tone(cfg.window_len - 1, 50.0), cfg), std::invalid_argument);
}

TEST(LogMel, ZeroSignalHitsFloor) {
  MelConfig cfg;
  RawRecording r = tone(600, 0.0);
  r.channels.front().setZero();
  const auto s = log_mel(r, cfg);
  EXPECT_TRUE((s.values - std::log(kLogFloor)).abs().maxCoeff() < 1e-12);
}

TEST(LogMel, HopShiftMovesOneFrame) {
  MelConfig cfg;
  Rng rng = make_rng(3, Stream::kInit, 0);
  std::normal_distribution<float> normal;
  RawRecording full;
  full.sample_rate = cfg.sample_rate;
  Eigen::VectorXf x(900);
  for (Index n = 0; n < x.size(); ++n) x[n] = normal(rng);
  full.channels.push_back(x);
  RawRecording shifted = full;
  shifted.channels.front() = x.segment(cfg.hop_len, x.size() - cfg.hop_len);
  const auto a = log_mel(full, cfg);
  const auto b = log_mel(shifted, cfg);
  ASSERT_EQ(b.frames, a.frames - 1);
  for (Index f = 0; f < a.mel_bins; ++f) {
    for (Index t = 0; t < b.frames; ++t) EXPECT_NEAR(b(0, f, t), a(0, f, t + 1), 1e-9);
  }
}

TEST(LogMel, ToneEnergyPeaksNearItsMelBin) {
  MelConfig cfg;
  const double hz = 200.0;
  const auto s = log_mel(tone(1000, hz), cfg);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(s.mel_bins);
  for (Index f = 0; f < s.mel_bins; ++f) {
    for (Index t = 0; t < s.frames; ++t) mean[f] += s(0, f, t);
  }
  Index peak = 0;
  mean.maxCoeff(&peak);
  const Eigen::VectorXd centers = mel_centers_hz(cfg);
  Index nearest = 0;
  (centers.array() - hz).abs().minCoeff(&nearest);
  EXPECT_LE(std::abs(peak - nearest), 2);
}

TEST(MelScale, RoundTripsAndIsMonotone) {
  for (double hz : {0.0, 10.0, 125.0, 499.0, 8000.0}) EXPECT_NEAR(mel_to_hz(hz_to_mel(hz)), hz, 1e-9);
  EXPECT_LT(hz_to_mel(100.0), hz_to_mel(101.0));
}

TEST(Filterbank, NonNegativeAndEveryFilterNonEmpty) {
  MelConfig cfg;
  const Eigen::MatrixXd fb = mel_filterbank(cfg);
  EXPECT_EQ(fb.rows(), cfg.mel_bins);
  EXPECT_EQ(fb.cols(), cfg.fft_size / 2 + 1);
  EXPECT_GE(fb.minCoeff(), 0.0);
  for (Index m = 0; m < fb.rows(); ++m) EXPECT_GT(fb.row(m).sum(), 0.0) << m;
}

TEST(Window, HannIsPeriodic) {
  const Eigen::VectorXd w = make_window(WindowKind::kHann, 8);
  EXPECT_NEAR(w[0], 0.0, 1e-15);
  EXPECT_NEAR(w[4], 1.0, 1e-15);
  EXPECT_NEAR(w[1], w[7], 1e-15);
  EXPECT_EQ(parse_window(window_name(WindowKind::kHamming)), WindowKind::kHamming);
  EXPECT_THROW(parse_window("blackman"), std::invalid_argument);
}

TEST(Slicing, DiscardsRemainderAndFlagsShortInput) {
  RawRecording r = tone(1234, 40.0);
  r.label_fine = 4;
  const auto res = slice_signal(r, 0.5);
  ASSERT_EQ(res.slices.size(), 2u);
  EXPECT_EQ(res.discarded, 234);
  EXPECT_FALSE(res.too_short);
  EXPECT_EQ(res.slices[1].label_fine, 4);
  EXPECT_EQ(res.slices[1].channels[0][0], r.channels[0][500]);
  const auto tiny = slice_signal(tone(100, 40.0), 0.5);
  EXPECT_TRUE(tiny.too_short);
  EXPECT_TRUE(tiny.slices.empty());
}

TEST(Recording, RaggedChannelsRejected) {
  RawRecording r = tone(300, 40.0);
  r.channels.push_back(Eigen::VectorXf::Zero(299));
  EXPECT_THROW(r.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace tfscil
