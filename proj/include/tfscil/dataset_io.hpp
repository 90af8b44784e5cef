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

// Dataset directory layout:
//
//   manifest.ini         [dataset] key = value header
//   records/000000.bin   16-byte header (magic, channel_count, length,
//                        fine label; little-endian 32-bit) followed by
//                        channel-major little-endian float32 samples
//   contexts.csv         optional ground-truth contexts of synthetic data
//
// kind = raw stores time series slices of slice_len_s seconds; kind =
// spectrogram stores mel_bins * frames values per channel.

#ifndef TFSCIL_DATASET_IO_HPP_
#define TFSCIL_DATASET_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tfscil/frontend.hpp"
#include "tfscil/spectrogram.hpp"
#include "tfscil/synth.hpp"
#include "tfscil/transform.hpp"

namespace tfscil {

inline constexpr std::uint32_t kRecordMagic = 0x4C435354;  // "TSCL" little-endian

enum class RecordKind { kRaw, kSpectrogram };

struct DatasetManifest {
  RecordKind kind = RecordKind::kSpectrogram;
  double sample_rate = 1000.0;
  Index channel_count = 1;
  double slice_len_s = 0.5;
  Index mel_bins = 0;  // spectrogram kind only
  Index frames = 0;    // spectrogram kind only
  Index record_count = 0;
  int class_count = 0;
  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

struct Record {
  int label = 0;
  Index channel_count = 0;
  Index length = 0;          // samples (raw) or mel_bins * frames (spectrogram) per channel
  std::vector<float> data;   // channel-major
  friend bool operator==(const Record&, const Record&) = default;
};

// In-memory spectrogram dataset used by training and evaluation.
struct Dataset {
  std::vector<Spectrogram<float>> maps;
  std::vector<int> labels;
  // Ground truth, present only for synthetic data.
  std::vector<ContextParams> contexts;
  std::vector<Spectrogram<float>> canonicals;  // indexed by class
  int class_count = 0;

  Index size() const { return static_cast<Index>(maps.size()); }
  bool has_ground_truth() const { return !contexts.empty() && !canonicals.empty(); }
  void validate() const;
};

Dataset synth_dataset(const SynthCatalog& catalog);

// Throws if dir exists and is non-empty, unless force is set (the old
// contents are removed first).
void write_dataset(const std::filesystem::path& dir, const DatasetManifest& manifest,
                   const std::vector<Record>& records,
                   const std::vector<ContextParams>* contexts, bool force);

struct DatasetFiles {
  DatasetManifest manifest;
  std::vector<Record> records;
  std::vector<ContextParams> contexts;  // empty when no sidecar
};

DatasetFiles read_dataset(const std::filesystem::path& dir);

// Writes a synthetic catalog's observations with the ground-truth sidecar.
void gen_dataset(const SynthSpec& spec, const std::filesystem::path& dir, bool force);

// Spectrogram records are reshaped; raw records go through log_mel.
// Labels are remapped to 0..class_count-1 in order of first appearance
// sorted by original id.
Dataset to_dataset(const DatasetFiles& files, const MelConfig& mel);

std::vector<Record> to_records(const std::vector<RawRecording>& slices);

}  // namespace tfscil

#endif  // TFSCIL_DATASET_IO_HPP_
