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

#include "tfscil/dataset_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "tfscil/binary_io.hpp"

namespace tfscil {

namespace fs = std::filesystem;

namespace {

std::string kind_name(RecordKind k) { return k == RecordKind::kRaw ? "raw" : "spectrogram"; }

RecordKind parse_kind(const std::string& s) {
  if (s == "raw") return RecordKind::kRaw;
  if (s == "spectrogram") return RecordKind::kSpectrogram;
  throw std::invalid_argument("manifest: unknown kind '" + s + "'");
}

std::string record_name(Index i) {
  std::ostringstream os;
  os << std::setw(6) << std::setfill('0') << i << ".bin";
  return os.str();
}

void write_record(const fs::path& path, const Record& r) {
  if (static_cast<Index>(r.data.size()) != r.channel_count * r.length) {
    throw std::invalid_argument("write_record: data size does not match header");
  }
  std::string buf;
  binio::put_u32(buf, kRecordMagic);
  binio::put_u32(buf, static_cast<std::uint32_t>(r.channel_count));
  binio::put_u32(buf, static_cast<std::uint32_t>(r.length));
  binio::put_i32(buf, r.label);
  for (float v : r.data) binio::put_f32(buf, v);
  binio::write_file(path, buf);
}

Record read_record(const fs::path& path) {
  const std::string buf = binio::read_file(path);
  binio::Reader in(buf, path.string());
  if (in.u32() != kRecordMagic) throw std::runtime_error(path.string() + ": bad record magic");
  Record r;
  r.channel_count = in.u32();
  r.length = in.u32();
  r.label = in.i32();
  const auto n = static_cast<std::size_t>(r.channel_count * r.length);
  if (in.remaining() != n * 4) {
    throw std::runtime_error(path.string() + ": payload size does not match header");
  }
  r.data.resize(n);
  for (auto& v : r.data) v = in.f32();
  return r;
}

}  // namespace

void Dataset::validate() const {
  if (maps.empty()) throw std::invalid_argument("Dataset: empty");
  if (labels.size() != maps.size()) throw std::invalid_argument("Dataset: labels/maps size mismatch");
  for (const auto& m : maps) {
    if (!m.same_shape(maps.front())) throw ShapeError("Dataset: spectrogram shapes differ");
    if (!m.all_finite()) throw std::invalid_argument("Dataset: non-finite spectrogram values");
  }
  for (int y : labels) {
    if (y < 0 || y >= class_count) throw std::out_of_range("Dataset: label out of range");
  }
  if (!contexts.empty() && contexts.size() != maps.size()) {
    throw std::invalid_argument("Dataset: contexts/maps size mismatch");
  }
}

Dataset synth_dataset(const SynthCatalog& catalog) {
  const SynthSpec& spec = catalog.spec();
  Dataset ds;
  ds.class_count = spec.material_count;
  for (int m = 0; m < spec.material_count; ++m) {
    ds.canonicals.push_back(catalog.canonical(m).cast<float>());
    for (int i = 0; i < spec.per_class_count; ++i) {
      SynthSample s = synth_sample(catalog, m, i);
      ds.maps.push_back(s.observed.cast<float>());
      ds.labels.push_back(m);
      ds.contexts.push_back(s.context);
    }
  }
  return ds;
}

void write_dataset(const fs::path& dir, const DatasetManifest& manifest, const std::vector<Record>& records,
                   const std::vector<ContextParams>* contexts, bool force) {
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    if (!force) throw std::runtime_error(dir.string() + " exists and is not empty (use --force)");
    fs::remove_all(dir);
  }
  if (contexts && contexts->size() != records.size()) {
    throw std::invalid_argument("write_dataset: contexts/records size mismatch");
  }
  fs::create_directories(dir / "records");

  boost::property_tree::ptree pt;
  pt.put("dataset.format", 1);
  pt.put("dataset.kind", kind_name(manifest.kind));
  pt.put("dataset.sample_rate", manifest.sample_rate);
  pt.put("dataset.channel_count", manifest.channel_count);
  pt.put("dataset.slice_len_s", manifest.slice_len_s);
  pt.put("dataset.mel_bins", manifest.mel_bins);
  pt.put("dataset.frames", manifest.frames);
  pt.put("dataset.record_count", static_cast<Index>(records.size()));
  pt.put("dataset.class_count", manifest.class_count);
  boost::property_tree::write_ini((dir / "manifest.ini").string(), pt);

  for (std::size_t i = 0; i < records.size(); ++i) {
    const Record& r = records[i];
    if (r.channel_count != manifest.channel_count) {
      throw std::invalid_argument("write_dataset: record channel_count differs from manifest");
    }
    write_record(dir / "records" / record_name(static_cast<Index>(i)), r);
  }

  if (contexts) {
    std::ofstream out(dir / "contexts.csv");
    out << "record,label,delta,tau,bias,tilt\n" << std::setprecision(17);
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& c = (*contexts)[i];
      out << i << ',' << records[i].label << ',' << c.delta << ',' << c.tau << ',' << c.bias << ','
          << c.tilt << '\n';
    }
    if (!out) throw std::runtime_error("write_dataset: failed writing contexts.csv");
  }
}

DatasetFiles read_dataset(const fs::path& dir) {
  const fs::path mpath = dir / "manifest.ini";
  if (!fs::exists(mpath)) throw std::runtime_error(mpath.string() + ": missing manifest");
  boost::property_tree::ptree pt;
  boost::property_tree::read_ini(mpath.string(), pt);
  DatasetFiles files;
  auto& m = files.manifest;
  try {
    m.kind = parse_kind(pt.get<std::string>("dataset.kind"));
    m.sample_rate = pt.get<double>("dataset.sample_rate");
    m.channel_count = pt.get<Index>("dataset.channel_count");
    m.slice_len_s = pt.get<double>("dataset.slice_len_s");
    m.mel_bins = pt.get<Index>("dataset.mel_bins", 0);
    m.frames = pt.get<Index>("dataset.frames", 0);
    m.record_count = pt.get<Index>("dataset.record_count");
    m.class_count = pt.get<int>("dataset.class_count", 0);
  } catch (const boost::property_tree::ptree_error& e) {
    throw std::runtime_error(mpath.string() + ": " + e.what());
  }
  if (m.kind == RecordKind::kSpectrogram && (m.mel_bins < 2 || m.frames < 1)) {
    throw std::runtime_error(mpath.string() + ": spectrogram datasets need mel_bins and frames");
  }
  for (Index i = 0; i < m.record_count; ++i) {
    Record r = read_record(dir / "records" / record_name(i));
    if (r.channel_count != m.channel_count) {
      throw std::runtime_error("record " + std::to_string(i) + ": channel_count differs from manifest");
    }
    if (m.kind == RecordKind::kSpectrogram && r.length != m.mel_bins * m.frames) {
      throw std::runtime_error("record " + std::to_string(i) + ": length differs from mel_bins*frames");
    }
    files.records.push_back(std::move(r));
  }
  const fs::path cpath = dir / "contexts.csv";
  if (fs::exists(cpath)) {
    std::ifstream in(cpath);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream row(line);
      std::string cell;
      std::vector<double> v;
      while (std::getline(row, cell, ',')) v.push_back(std::stod(cell));
      if (v.size() != 6) throw std::runtime_error(cpath.string() + ": malformed row");
      files.contexts.push_back({v[2], v[3], v[4], v[5]});
    }
    if (static_cast<Index>(files.contexts.size()) != m.record_count) {
      throw std::runtime_error(cpath.string() + ": row count differs from record_count");
    }
  }
  return files;
}

void gen_dataset(const SynthSpec& spec, const fs::path& dir, bool force) {
  const SynthCatalog catalog(spec);
  std::vector<Record> records;
  std::vector<ContextParams> contexts;
  for (int m = 0; m < spec.material_count; ++m) {
    for (int i = 0; i < spec.per_class_count; ++i) {
      SynthSample s = synth_sample(catalog, m, i);
      if (!spec.context_bounds.contains(s.context)) {
        throw std::logic_error("gen_dataset: sampled context outside bounds");
      }
      Record r;
      r.label = m;
      r.channel_count = spec.channels;
      r.length = spec.mel_bins * spec.frames;
      r.data.assign(s.observed.values.data(), s.observed.values.data() + s.observed.size());
      records.push_back(std::move(r));
      contexts.push_back(s.context);
    }
  }
  DatasetManifest manifest;
  manifest.kind = RecordKind::kSpectrogram;
  manifest.channel_count = spec.channels;
  manifest.mel_bins = spec.mel_bins;
  manifest.frames = spec.frames;
  manifest.class_count = spec.material_count;
  write_dataset(dir, manifest, records, &contexts, force);
}

Dataset to_dataset(const DatasetFiles& files, const MelConfig& mel) {
  const auto& m = files.manifest;
  std::map<int, int> remap;
  for (const auto& r : files.records) remap.emplace(r.label, 0);
  int next = 0;
  for (auto& [_, v] : remap) v = next++;

  Dataset ds;
  ds.class_count = next;
  for (const auto& r : files.records) {
    if (m.kind == RecordKind::kSpectrogram) {
      Spectrogram<float> s(r.channel_count, m.mel_bins, m.frames);
      s.values = Eigen::Map<const Eigen::ArrayXf>(r.data.data(), static_cast<Index>(r.data.size()));
      ds.maps.push_back(std::move(s));
    } else {
      RawRecording rec;
      rec.sample_rate = m.sample_rate;
      rec.label_fine = r.label;
      for (Index c = 0; c < r.channel_count; ++c) {
        rec.channels.push_back(Eigen::Map<const Eigen::VectorXf>(r.data.data() + c * r.length, r.length));
      }
      MelConfig cfg = mel;
      cfg.sample_rate = m.sample_rate;
      ds.maps.push_back(log_mel(rec, cfg).cast<float>());
    }
    ds.labels.push_back(remap.at(r.label));
  }
  ds.contexts = files.contexts;
  ds.validate();
  return ds;
}

std::vector<Record> to_records(const std::vector<RawRecording>& slices) {
  std::vector<Record> out;
  for (const auto& s : slices) {
    s.validate();
    Record r;
    r.label = s.label_fine;
    r.channel_count = s.channel_count();
    r.length = s.length();
    for (const auto& ch : s.channels) r.data.insert(r.data.end(), ch.data(), ch.data() + ch.size());
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace tfscil
