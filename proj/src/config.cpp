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

#include "tfscil/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace tfscil {

namespace {

constexpr const char* kLogSection = "log";

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}
std::string fmt(bool v) { return v ? "true" : "false"; }
template <typename I>
std::string fmt_int(I v) {
  return std::to_string(v);
}

double to_double(const std::string& field, const std::string& s) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError(field + ": not a number: '" + s + "'");
  return v;
}

template <typename I>
I to_int(const std::string& field, const std::string& s) {
  I v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError(field + ": not an integer: '" + s + "'");
  return v;
}

bool to_bool(const std::string& field, const std::string& s) {
  if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "off" || s == "no") return false;
  throw ConfigError(field + ": not a boolean: '" + s + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t"), b = item.find_last_not_of(" \t");
    if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (const auto& x : v) out += (out.empty() ? "" : ",") + std::to_string(x);
  return out;
}

struct Field {
  std::string section, key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::string path() const { return section + "." + key; }
};

#define TF_DOUBLE(sec, key, member)                                                                  \
  Field {                                                                                             \
    sec, key, [](const ExperimentConfig& c) { return fmt(c.member); },                               \
        [](ExperimentConfig& c, const std::string& v) { c.member = to_double(sec "." key, v); }      \
  }
#define TF_INT(sec, key, member, type)                                                               \
  Field {                                                                                             \
    sec, key, [](const ExperimentConfig& c) { return fmt_int(c.member); },                           \
        [](ExperimentConfig& c, const std::string& v) { c.member = to_int<type>(sec "." key, v); }   \
  }
#define TF_BOOL(sec, key, member)                                                                    \
  Field {                                                                                             \
    sec, key, [](const ExperimentConfig& c) { return fmt(c.member); },                               \
        [](ExperimentConfig& c, const std::string& v) { c.member = to_bool(sec "." key, v); }        \
  }

void add_schedule(std::vector<Field>& f, const std::string& sec, TrainSchedule TrainSchedules::*which) {
  auto d = [sec, which](const std::string& key, double TrainSchedule::*m) {
    return Field{sec, key, [which, m](const ExperimentConfig& c) { return fmt(c.schedules.*which.*m); },
                 [which, m, sec, key](ExperimentConfig& c, const std::string& v) {
                   c.schedules.*which.*m = to_double(sec + "." + key, v);
                 }};
  };
  auto i = [sec, which](const std::string& key, int TrainSchedule::*m) {
    return Field{sec, key, [which, m](const ExperimentConfig& c) { return fmt_int(c.schedules.*which.*m); },
                 [which, m, sec, key](ExperimentConfig& c, const std::string& v) {
                   c.schedules.*which.*m = to_int<int>(sec + "." + key, v);
                 }};
  };
  f.push_back(d("lr", &TrainSchedule::lr));
  f.push_back(i("epochs", &TrainSchedule::epochs));
  f.push_back(d("decay", &TrainSchedule::decay));
  f.push_back(i("decay_period", &TrainSchedule::decay_period));
  f.push_back(i("batch_size", &TrainSchedule::batch_size));
  f.push_back(d("momentum", &TrainSchedule::momentum));
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f{
        Field{"experiment", "name", [](const ExperimentConfig& c) { return c.name; },
              [](ExperimentConfig& c, const std::string& v) { c.name = v; }},
        Field{"experiment", "seeds", [](const ExperimentConfig& c) { return join(c.seeds); },
              [](ExperimentConfig& c, const std::string& v) {
                c.seeds.clear();
                for (const auto& s : split_list(v)) c.seeds.push_back(to_int<std::uint64_t>("experiment.seeds", s));
              }},
        TF_BOOL("experiment", "reseed_splits", reseed_splits),
        TF_BOOL("experiment", "save_checkpoints", save_checkpoints),
        Field{"data", "source",
              [](const ExperimentConfig& c) { return std::string(c.source == DataSource::kSynthetic ? "synthetic" : "directory"); },
              [](ExperimentConfig& c, const std::string& v) {
                if (v == "synthetic") c.source = DataSource::kSynthetic;
                else if (v == "directory") c.source = DataSource::kDirectory;
                else throw ConfigError("data.source: expected synthetic or directory, got '" + v + "'");
              }},
        Field{"data", "path", [](const ExperimentConfig& c) { return c.data_path; },
              [](ExperimentConfig& c, const std::string& v) { c.data_path = v; }},
        TF_INT("synth", "material_count", synth.material_count, int),
        TF_INT("synth", "per_class_count", synth.per_class_count, int),
        TF_INT("synth", "resonance_count", synth.resonance_count, int),
        TF_DOUBLE("synth", "noise_std", synth.noise_std),
        TF_INT("synth", "seed", synth.rng_seed, std::uint64_t),
        TF_INT("synth", "channels", synth.channels, Index),
        TF_INT("synth", "mel_bins", synth.mel_bins, Index),
        TF_INT("synth", "frames", synth.frames, Index),
        TF_DOUBLE("synth", "min_separation", synth.min_separation),
        TF_DOUBLE("synth", "delta_max", synth.context_bounds.delta_max),
        TF_DOUBLE("synth", "tau_min", synth.context_bounds.tau_min),
        TF_DOUBLE("synth", "tau_max", synth.context_bounds.tau_max),
        TF_DOUBLE("synth", "bias_max", synth.context_bounds.bias_max),
        TF_DOUBLE("synth", "tilt_max", synth.context_bounds.tilt_max),
        TF_INT("mel", "fft_size", mel.fft_size, Index),
        TF_INT("mel", "window_len", mel.window_len, Index),
        TF_INT("mel", "hop_len", mel.hop_len, Index),
        Field{"mel", "window", [](const ExperimentConfig& c) { return window_name(c.mel.window); },
              [](ExperimentConfig& c, const std::string& v) {
                try {
                  c.mel.window = parse_window(v);
                } catch (const std::invalid_argument& e) {
                  throw ConfigError(std::string("mel.window: ") + e.what());
                }
              }},
        TF_INT("mel", "mel_bins", mel.mel_bins, Index),
        TF_DOUBLE("mel", "sample_rate", mel.sample_rate),
        TF_DOUBLE("bounds", "delta_max", bounds.delta_max),
        TF_DOUBLE("bounds", "tau_min", bounds.tau_min),
        TF_DOUBLE("bounds", "tau_max", bounds.tau_max),
        TF_DOUBLE("bounds", "bias_max", bounds.bias_max),
        TF_DOUBLE("bounds", "tilt_max", bounds.tilt_max),
        TF_INT("estimator", "block_count", estimator.block_count, int),
        TF_INT("estimator", "base_width", estimator.base_width, int),
        Field{"embedder", "widths", [](const ExperimentConfig& c) { return join(c.embedder.widths); },
              [](ExperimentConfig& c, const std::string& v) {
                c.embedder.widths.clear();
                for (const auto& s : split_list(v)) c.embedder.widths.push_back(to_int<int>("embedder.widths", s));
              }},
        TF_INT("embedder", "blocks_per_stage", embedder.blocks_per_stage, int),
        TF_INT("embedder", "embedding_dim", embedder.embedding_dim, int),
        TF_DOUBLE("ucpc", "alpha", ucpc.map.alpha),
        TF_DOUBLE("ucpc", "beta", ucpc.map.beta),
        TF_INT("ucpc", "n_ucpc", ucpc.n_ucpc, int),
        TF_BOOL("ucpc", "oracle_anchor", ucpc.oracle_anchor),
        TF_DOUBLE("loss", "lambda1", weights.cat),
        TF_DOUBLE("loss", "lambda2", weights.reg),
        TF_DOUBLE("loss", "lambda3", weights.old),
        TF_INT("protocol", "ways", protocol.ways, int),
        TF_INT("protocol", "shots", protocol.shots, int),
        TF_INT("protocol", "sessions", protocol.sessions, int),
        TF_INT("protocol", "base_class_count", protocol.base_class_count, int),
        TF_DOUBLE("protocol", "test_fraction", protocol.test_fraction),
        TF_INT("protocol", "seed", protocol.seed, std::uint64_t),
        TF_BOOL("ablation", "cat", ablation.cat),
        TF_BOOL("ablation", "cat_loss", ablation.cat_loss),
        TF_BOOL("ablation", "ucpc", ablation.ucpc),
    };
    add_schedule(f, "schedule.pretrain", &TrainSchedules::pretrain);
    add_schedule(f, "schedule.full_base", &TrainSchedules::full_base);
    add_schedule(f, "schedule.incremental", &TrainSchedules::incremental);
    return f;
  }();
  return table;
}

#undef TF_DOUBLE
#undef TF_INT
#undef TF_BOOL

// Re-raises validation failures as ConfigError with the field path.
template <typename F>
void check(const std::string& field, F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field + ": " + e.what());
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ConfigError("experiment.seeds: at least one seed is required");
  if (source == DataSource::kDirectory && data_path.empty()) throw ConfigError("data.path: required for directory source");
  check("synth", [&] { synth.validate(protocol.ways * protocol.sessions + 2); });
  check("mel", [&] { mel.validate(); });
  check("bounds", [&] { bounds.validate(); });
  if (estimator.block_count < 1 || estimator.base_width < 1) {
    throw ConfigError("estimator: block_count and base_width must be >= 1");
  }
  check("embedder", [&] { embedder.validate(); });
  for (int w : embedder.widths) {
    if (w < 1) throw ConfigError("embedder.widths: widths must be >= 1");
  }
  check("ucpc", [&] { ucpc.map.validate(); });
  if (ucpc.n_ucpc < 1) throw ConfigError("ucpc.n_ucpc: must be >= 1");
  check("loss", [&] { weights.validate(); });
  check("schedule", [&] {
    schedules.pretrain.validate("schedule.pretrain");
    schedules.full_base.validate("schedule.full_base");
    schedules.incremental.validate("schedule.incremental");
  });
  check("protocol", [&] { protocol.validate(); });
  if (ablation.cat_loss && !ablation.cat) throw ConfigError("ablation.cat_loss: requires ablation.cat");
  if (ucpc.oracle_anchor && source != DataSource::kSynthetic) {
    throw ConfigError("ucpc.oracle_anchor: only available for synthetic data");
  }
}

ExperimentConfig parse_config(const std::string& text) {
  boost::property_tree::ptree pt;
  std::istringstream in(text);
  try {
    boost::property_tree::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  ExperimentConfig cfg;
  for (const auto& [section, body] : pt) {
    if (section == kLogSection) continue;  // written by runs, not an input
    if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside any section");
    for (const auto& [key, value] : body) {
      const std::string path = section + "." + key;
      auto it = std::find_if(fields().begin(), fields().end(), [&](const Field& f) { return f.path() == path; });
      if (it == fields().end()) throw ConfigError(path + ": unknown field");
      it->set(cfg, value.data());
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  std::string section;
  for (const Field& f : fields()) {
    if (f.section != section) {
      out << (section.empty() ? "" : "\n") << '[' << f.section << "]\n";
      section = f.section;
    }
    out << f.key << " = " << f.get(cfg) << '\n';
  }
  return out.str();
}

}  // namespace tfscil
