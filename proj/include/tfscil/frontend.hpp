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

#ifndef TFSCIL_FRONTEND_HPP_
#define TFSCIL_FRONTEND_HPP_

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tfscil/spectrogram.hpp"

namespace tfscil {

// Multi-channel time series; channels[c] holds the samples of channel c.
struct RawRecording {
  std::vector<Eigen::VectorXf> channels;
  double sample_rate = 0.0;
  int label_fine = 0;
  int label_coarse = 0;

  Index channel_count() const { return static_cast<Index>(channels.size()); }
  Index length() const { return channels.empty() ? 0 : channels.front().size(); }
  // Throws if channels are ragged or the sample rate is not positive.
  void validate() const;
};

struct SliceResult {
  std::vector<RawRecording> slices;
  Index discarded = 0;        // trailing samples that did not fill a slice
  bool too_short = false;     // recording shorter than one slice
};

// Non-overlapping consecutive slices of round(slice_len_s * sample_rate)
// samples. Each slice inherits the labels.
SliceResult slice_signal(const RawRecording& rec, double slice_len_s);

enum class WindowKind { kHann, kHamming, kRectangular };

WindowKind parse_window(const std::string& name);
std::string window_name(WindowKind w);

struct MelConfig {
  Index fft_size = 128;
  Index window_len = 128;
  Index hop_len = 16;
  WindowKind window = WindowKind::kHann;
  Index mel_bins = 64;
  double sample_rate = 1000.0;

  void validate() const;
  // floor((len - window_len) / hop_len) + 1; no center padding.
  Index frame_count(Index len) const;
  friend bool operator==(const MelConfig&, const MelConfig&) = default;
};

inline constexpr double kLogFloor = 1e-10;

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular filters on the HTK mel scale spanning 0..sample_rate/2,
// (mel_bins, fft_size/2 + 1). Every row has positive sum on a contiguous
// bin range.
Eigen::MatrixXd mel_filterbank(const MelConfig& cfg);

// Center frequency in Hz of each mel filter.
Eigen::VectorXd mel_centers_hz(const MelConfig& cfg);

Eigen::VectorXd make_window(WindowKind kind, Index len);

// Magnitude spectra of all frames, (fft_size/2 + 1, frames).
Eigen::MatrixXd magnitude_stft(const Eigen::VectorXd& signal, const MelConfig& cfg);

// Per channel: magnitude STFT, mel projection, log(x + kLogFloor).
Spectrogram<double> log_mel(const RawRecording& slice, const MelConfig& cfg);

}  // namespace tfscil

#endif  // TFSCIL_FRONTEND_HPP_
