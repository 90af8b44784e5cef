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

#include "tfscil/frontend.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

namespace tfscil {

void RawRecording::validate() const {
  if (!(sample_rate > 0)) throw std::invalid_argument("RawRecording: sample_rate must be positive");
  if (channels.empty()) throw std::invalid_argument("RawRecording: no channels");
  for (const auto& ch : channels) {
    if (ch.size() != channels.front().size()) {
      throw std::invalid_argument("RawRecording: channels have unequal length");
    }
  }
}

SliceResult slice_signal(const RawRecording& rec, double slice_len_s) {
  rec.validate();
  const double len_d = std::round(slice_len_s * rec.sample_rate);
  if (!(len_d >= 1)) throw std::invalid_argument("slice_signal: slice shorter than one sample");
  const Index len = static_cast<Index>(len_d);
  SliceResult result;
  const Index total = rec.length();
  if (total < len) {
    result.too_short = true;
    result.discarded = total;
    return result;
  }
  const Index count = total / len;
  for (Index i = 0; i < count; ++i) {
    RawRecording s;
    s.sample_rate = rec.sample_rate;
    s.label_fine = rec.label_fine;
    s.label_coarse = rec.label_coarse;
    for (const auto& ch : rec.channels) s.channels.push_back(ch.segment(i * len, len));
    result.slices.push_back(std::move(s));
  }
  result.discarded = total - count * len;
  return result;
}

WindowKind parse_window(const std::string& name) {
  if (name == "hann") return WindowKind::kHann;
  if (name == "hamming") return WindowKind::kHamming;
  if (name == "rectangular") return WindowKind::kRectangular;
  throw std::invalid_argument("unknown window: " + name);
}

std::string window_name(WindowKind w) {
  switch (w) {
    case WindowKind::kHann: return "hann";
    case WindowKind::kHamming: return "hamming";
    case WindowKind::kRectangular: return "rectangular";
  }
  return "hann";
}

void MelConfig::validate() const {
  if (fft_size < 2) throw std::invalid_argument("MelConfig: fft_size must be >= 2");
  if (window_len < 1 || window_len > fft_size) {
    throw std::invalid_argument("MelConfig: need 1 <= window_len <= fft_size");
  }
  if (hop_len < 1) throw std::invalid_argument("MelConfig: hop_len must be >= 1");
  if (mel_bins < 2) throw std::invalid_argument("MelConfig: mel_bins must be >= 2");
  if (!(sample_rate > 0)) throw std::invalid_argument("MelConfig: sample_rate must be positive");
}

Index MelConfig::frame_count(Index len) const {
  if (len < window_len) return 0;
  return (len - window_len) / hop_len + 1;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace {

Eigen::VectorXd mel_edges_hz(const MelConfig& cfg) {
  const double top = hz_to_mel(cfg.sample_rate / 2.0);
  Eigen::VectorXd edges(cfg.mel_bins + 2);
  for (Index i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(cfg.mel_bins + 1));
  }
  return edges;
}

}  // namespace

Eigen::VectorXd mel_centers_hz(const MelConfig& cfg) {
  cfg.validate();
  return mel_edges_hz(cfg).segment(1, cfg.mel_bins);
}

Eigen::MatrixXd mel_filterbank(const MelConfig& cfg) {
  cfg.validate();
  const Index bins = cfg.fft_size / 2 + 1;
  const Eigen::VectorXd edges = mel_edges_hz(cfg);
  const double bin_hz = cfg.sample_rate / static_cast<double>(cfg.fft_size);
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(cfg.mel_bins, bins);
  for (Index m = 0; m < cfg.mel_bins; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (Index k = 0; k < bins; ++k) {
      const double hz = static_cast<double>(k) * bin_hz;
      const double up = (hz - lo) / (mid - lo);
      const double down = (hi - hz) / (hi - mid);
      fb(m, k) = std::max(0.0, std::min(up, down));
    }
    // Filters narrower than the bin spacing fall between bins; they take
    // the bin nearest to their center.
    if (fb.row(m).sum() <= 0.0) {
      const Index k = std::clamp<Index>(static_cast<Index>(std::lround(mid / bin_hz)), 0, bins - 1);
      fb(m, k) = 1.0;
    }
  }
  return fb;
}

Eigen::VectorXd make_window(WindowKind kind, Index len) {
  Eigen::VectorXd w(len);
  const double pi = 3.14159265358979323846;
  for (Index n = 0; n < len; ++n) {
    // Periodic form, as used for spectral analysis.
    const double phase = 2.0 * pi * static_cast<double>(n) / static_cast<double>(len);
    switch (kind) {
      case WindowKind::kHann: w[n] = 0.5 - 0.5 * std::cos(phase); break;
      case WindowKind::kHamming: w[n] = 0.54 - 0.46 * std::cos(phase); break;
      case WindowKind::kRectangular: w[n] = 1.0; break;
    }
  }
  return w;
}

Eigen::MatrixXd magnitude_stft(const Eigen::VectorXd& signal, const MelConfig& cfg) {
  cfg.validate();
  const Index frames = cfg.frame_count(signal.size());
  if (frames < 1) throw std::invalid_argument("magnitude_stft: signal shorter than one window");
  if (!signal.allFinite()) throw std::invalid_argument("magnitude_stft: non-finite input samples");
  const Index bins = cfg.fft_size / 2 + 1;
  const Eigen::VectorXd window = make_window(cfg.window, cfg.window_len);
  Eigen::FFT<double> fft;
  std::vector<double> frame(static_cast<std::size_t>(cfg.fft_size));
  std::vector<std::complex<double>> spectrum;
  Eigen::MatrixXd mag(bins, frames);
  for (Index t = 0; t < frames; ++t) {
    std::fill(frame.begin(), frame.end(), 0.0);
    for (Index n = 0; n < cfg.window_len; ++n) frame[n] = signal[t * cfg.hop_len + n] * window[n];
    fft.fwd(spectrum, frame);
    for (Index k = 0; k < bins; ++k) mag(k, t) = std::abs(spectrum[k]);
  }
  return mag;
}

Spectrogram<double> log_mel(const RawRecording& slice, const MelConfig& cfg) {
  slice.validate();
  cfg.validate();
  if (slice.length() < cfg.window_len) {
    throw std::invalid_argument("log_mel: slice shorter than the analysis window");
  }
  const Eigen::MatrixXd fb = mel_filterbank(cfg);
  const Index frames = cfg.frame_count(slice.length());
  Spectrogram<double> out(slice.channel_count(), cfg.mel_bins, frames);
  for (Index c = 0; c < slice.channel_count(); ++c) {
    const Eigen::MatrixXd mel = fb * magnitude_stft(slice.channels[c].cast<double>(), cfg);
    for (Index f = 0; f < cfg.mel_bins; ++f) {
      for (Index t = 0; t < frames; ++t) out(c, f, t) = std::log(mel(f, t) + kLogFloor);
    }
  }
  return out;
}

}  // namespace tfscil
