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

#include "tfscil/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iomanip>
#include <sstream>
#include <thread>

#include "tfscil/binary_io.hpp"

namespace tfscil {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

InputShape input_shape_of(const Dataset& ds) {
  const auto& m = ds.maps.front();
  return {m.channels, m.mel_bins, m.frames};
}

template <typename Scalar>
Checkpoint snapshot(Model<Scalar>& model, const std::vector<ClassRecord>& records) {
  Checkpoint ck;
  if (model.cat()) ck.nets.emplace_back("estimator", model.estimator().state().state_dict());
  ck.nets.emplace_back("embedder", model.embedder().state().state_dict());
  ck.records = records;
  return ck;
}

template <typename Scalar>
void restore(Model<Scalar>& model, const Checkpoint& ck) {
  if (model.cat()) model.estimator().state().load_state_dict(ck.net("estimator"));
  model.embedder().state().load_state_dict(ck.net("embedder"));
}

std::string manifest_text(const ExperimentConfig& cfg, std::uint64_t seed, const std::vector<EpochLog>& log) {
  ExperimentConfig one = cfg;
  one.seeds = {seed};
  std::ostringstream out;
  out << serialize_config(one) << "\n[log]\n";
  out << std::setprecision(9);
  for (const auto& e : log) {
    out << e.stage << "_s" << e.session << "_e" << std::setw(3) << std::setfill('0') << e.epoch
        << std::setfill(' ') << " = lr " << e.lr << " loss " << e.loss << '\n';
  }
  return out.str();
}

void write_text(const fs::path& path, const std::string& text) { binio::write_file(path, text); }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

const char* kResultsHeader = "row,session,classes_seen,accuracy_pct,aa,pd,adr";

struct ParsedRun {
  std::string label;
  std::vector<double> acc_pct;
  double aa = 0, pd = 0;
  std::optional<double> adr;
};

ParsedRun parse_results(const fs::path& path, const std::string& label) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  std::string line;
  std::getline(in, line);
  if (line != kResultsHeader) throw std::runtime_error(path.string() + ": unexpected header '" + line + "'");
  ParsedRun run;
  run.label = label;
  bool summary = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 7) throw std::runtime_error(path.string() + ": expected 7 columns in '" + line + "'");
    try {
      if (cells[0] == "session") {
        if (std::stoi(cells[1]) != static_cast<int>(run.acc_pct.size())) {
          throw std::runtime_error(path.string() + ": sessions out of order");
        }
        run.acc_pct.push_back(std::stod(cells[3]));
      } else if (cells[0] == "summary") {
        run.aa = std::stod(cells[4]);
        run.pd = std::stod(cells[5]);
        if (cells[6] != "NA") run.adr = std::stod(cells[6]);
        summary = true;
      } else {
        throw std::runtime_error(path.string() + ": unknown row kind '" + cells[0] + "'");
      }
    } catch (const std::logic_error&) {
      throw std::runtime_error(path.string() + ": malformed number in '" + line + "'");
    }
  }
  if (!summary || run.acc_pct.empty()) throw std::runtime_error(path.string() + ": missing session or summary rows");
  return run;
}

}  // namespace

Dataset load_data(const ExperimentConfig& cfg) {
  if (cfg.source == DataSource::kSynthetic) return synth_dataset(SynthCatalog(cfg.synth));
  return to_dataset(read_dataset(cfg.data_path), cfg.mel);
}

std::string BaseCache::key(const ExperimentConfig& cfg, std::uint64_t seed) {
  ExperimentConfig base = cfg;
  const ExperimentConfig defaults;
  base.name = defaults.name;
  base.seeds = {seed};
  base.save_checkpoints = defaults.save_checkpoints;
  base.ucpc = defaults.ucpc;
  base.weights.old = defaults.weights.old;
  base.schedules.incremental = defaults.schedules.incremental;
  base.ablation.ucpc = defaults.ablation.ucpc;
  return serialize_config(base);
}

std::shared_ptr<const BaseCache::Entry> BaseCache::find(const std::string& key) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : it->second;
}

void BaseCache::put(const std::string& key, Entry entry) {
  std::lock_guard<std::mutex> lock(mu_);
  entries_[key] = std::make_shared<const Entry>(std::move(entry));
}

RunResult run_single(const ExperimentConfig& cfg, const Dataset& ds, std::uint64_t seed, const fs::path& dir,
                     BaseCache* cache) {
  cfg.validate();
  ds.validate();
  ProtocolSpec protocol = cfg.protocol;
  if (cfg.reseed_splits) protocol.seed = seed;
  const SessionLedger ledger = build_sessions(ds.labels, ds.class_count, protocol);

  Model<float> model(cfg.embedder, cfg.estimator, cfg.bounds, input_shape_of(ds), cfg.ablation.cat, seed);
  RunResult result;
  result.seed = seed;

  std::vector<ClassRecord> records;
  const std::string key = cache ? BaseCache::key(cfg, seed) : std::string();
  auto hit = cache ? cache->find(key) : nullptr;
  if (hit) {
    restore(model, hit->checkpoint);
    records = hit->checkpoint.records;
    result.log = hit->log;
  } else {
    auto base = train_base(model, ds, ledger.supports[0], ledger.session_classes[0], cfg.schedules, cfg.weights,
                           cfg.ablation.cat_loss, cfg.bounds, cfg.ucpc.map.beta, seed);
    records = std::move(base.records);
    result.log = std::move(base.log);
    if (cache) cache->put(key, {snapshot(model, records), result.log});
  }
  for (auto& r : records) r.sigma_ucpc = cfg.ucpc.map.beta;

  const bool write = !dir.empty();
  if (write) fs::create_directories(dir / "checkpoints");

  for (int s = 0; s < ledger.session_count(); ++s) {
    if (s > 0) {
      auto inc = train_incremental(model, ds, ledger.supports[s], ledger.session_classes[s], s, records,
                                   cfg.schedules.incremental, cfg.weights.old, cfg.ucpc, cfg.ablation.ucpc,
                                   cfg.bounds, seed);
      result.log.insert(result.log.end(), inc.log.begin(), inc.log.end());
    }
    const auto classes = ledger.classes_up_to(s);
    require_coverage(records, classes);
    const auto tests = ledger.tests_up_to(s);
    const auto pred = predict(model, ds, tests, records);
    std::map<Index, int> by_index;
    for (std::size_t k = 0; k < tests.size(); ++k) by_index[tests[k]] = pred[k];
    result.accuracies.push_back(evaluate(tests, ds.labels, [&](Index i) { return by_index.at(i); }));
    result.classes_seen.push_back(static_cast<int>(classes.size()));
    if (write && cfg.save_checkpoints) {
      save_checkpoint(dir / "checkpoints" / (s == 0 ? std::string("base.ckpt") : "session_" + std::to_string(s) + ".ckpt"),
                      snapshot(model, records));
    }
  }
  std::vector<double> pct;
  for (double a : result.accuracies) pct.push_back(100.0 * a);
  result.metrics = metrics(pct);

  if (write) {
    write_text(dir / "manifest.ini", manifest_text(cfg, seed, result.log));
    write_text(dir / "results.csv", results_csv(result));
    write_text(dir / "curve.csv", curve_csv(result));
  }
  return result;
}

std::string results_csv(const RunResult& r) {
  std::ostringstream out;
  out << kResultsHeader << '\n';
  for (std::size_t s = 0; s < r.accuracies.size(); ++s) {
    out << "session," << s << ',' << r.classes_seen[s] << ',' << fixed(100.0 * r.accuracies[s]) << ",,,\n";
  }
  out << "summary,,,," << fixed(r.metrics.aa) << ',' << fixed(r.metrics.pd) << ','
      << (r.metrics.adr ? fixed(*r.metrics.adr) : std::string("NA")) << '\n';
  return out.str();
}

std::string curve_csv(const RunResult& r) {
  std::ostringstream out;
  out << "session,classes_seen,accuracy_pct\n";
  for (std::size_t s = 0; s < r.accuracies.size(); ++s) {
    out << s << ',' << r.classes_seen[s] << ',' << fixed(100.0 * r.accuracies[s]) << '\n';
  }
  return out.str();
}

std::vector<RunResult> run_experiment(const ExperimentConfig& cfg, const fs::path& out, bool force, bool parallel,
                                      std::ostream* progress) {
  cfg.validate();
  if (fs::exists(out) && !fs::is_empty(out)) {
    if (!force) throw std::runtime_error(out.string() + " exists and is not empty (use --force)");
    fs::remove_all(out);
  }
  fs::create_directories(out);
  const Dataset ds = load_data(cfg);
  BaseCache cache;
  std::mutex log_mu;
  const auto one = [&](std::uint64_t seed) {
    RunResult r = run_single(cfg, ds, seed, out / ("seed_" + std::to_string(seed)), &cache);
    if (progress) {
      std::lock_guard<std::mutex> lock(log_mu);
      *progress << "seed " << seed << ": AA " << fixed(r.metrics.aa, 2) << " PD " << fixed(r.metrics.pd, 2) << '\n';
    }
    return r;
  };

  std::vector<RunResult> results;
  if (parallel && cfg.seeds.size() > 1) {
    const std::size_t width = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    for (std::size_t start = 0; start < cfg.seeds.size(); start += width) {
      std::vector<std::future<RunResult>> jobs;
      for (std::size_t i = start; i < std::min(cfg.seeds.size(), start + width); ++i) {
        jobs.push_back(std::async(std::launch::async, one, cfg.seeds[i]));
      }
      for (auto& j : jobs) results.push_back(j.get());
    }
  } else {
    for (auto seed : cfg.seeds) results.push_back(one(seed));
  }

  std::ostringstream summary;
  summary << "seed";
  for (std::size_t s = 0; s < results.front().accuracies.size(); ++s) summary << ",acc_" << s;
  summary << ",aa,pd,adr\n";
  for (const auto& r : results) {
    summary << r.seed;
    for (double a : r.accuracies) summary << ',' << fixed(100.0 * a);
    summary << ',' << fixed(r.metrics.aa) << ',' << fixed(r.metrics.pd) << ','
            << (r.metrics.adr ? fixed(*r.metrics.adr) : std::string("NA")) << '\n';
  }
  write_text(out / "summary.csv", summary.str());
  return results;
}

std::string ReportTable::text() const {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  const auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      out << (c ? "  " : "") << (c ? std::right : std::left) << std::setw(static_cast<int>(width[c])) << cells[c];
    }
    out << '\n';
  };
  line(header);
  for (const auto& row : rows) line(row);
  return out.str();
}

std::string ReportTable::csv() const {
  std::ostringstream out;
  const auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) out << (c ? "," : "") << cells[c];
    out << '\n';
  };
  line(header);
  for (const auto& row : rows) line(row);
  return out.str();
}

ReportTable report(const std::vector<fs::path>& run_dirs) {
  if (run_dirs.empty()) throw std::invalid_argument("report: no run directories");
  ReportTable table;
  std::size_t sessions = 0;
  std::optional<double> first_aa;
  std::vector<std::vector<std::string>> mean_rows;
  for (const auto& given : run_dirs) {
    const fs::path dir = given.filename().empty() ? given.parent_path() : given;
    std::vector<fs::path> seed_dirs;
    if (fs::exists(dir / "results.csv")) {
      seed_dirs.push_back(dir);
    } else {
      if (!fs::is_directory(dir)) throw std::runtime_error(dir.string() + ": not a run directory");
      for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_directory() && fs::exists(e.path() / "results.csv")) seed_dirs.push_back(e.path());
      }
      std::sort(seed_dirs.begin(), seed_dirs.end());
    }
    if (seed_dirs.empty()) throw std::runtime_error(dir.string() + ": no results.csv found");
    std::vector<ParsedRun> runs;
    for (const auto& sd : seed_dirs) {
      runs.push_back(parse_results(sd / "results.csv", dir.filename().string() + "/" + sd.filename().string()));
      if (sessions == 0) sessions = runs.back().acc_pct.size();
      if (runs.back().acc_pct.size() != sessions) {
        throw std::runtime_error((sd / "results.csv").string() + ": session count differs from other runs");
      }
    }
    if (table.header.empty()) {
      table.header.push_back("run");
      for (std::size_t s = 0; s < sessions; ++s) table.header.push_back("acc_" + std::to_string(s));
      for (const char* h : {"aa", "aa_std", "pd", "adr", "delta_aa"}) table.header.push_back(h);
    }
    const double n = static_cast<double>(runs.size());
    std::vector<double> mean_acc(sessions, 0.0);
    double aa = 0, pd = 0, adr = 0, aa_sq = 0;
    bool adr_ok = true;
    for (const auto& r : runs) {
      std::vector<std::string> row{r.label};
      for (std::size_t s = 0; s < sessions; ++s) {
        row.push_back(fixed(r.acc_pct[s], 2));
        mean_acc[s] += r.acc_pct[s] / n;
      }
      row.push_back(fixed(r.aa, 2));
      row.push_back("");
      row.push_back(fixed(r.pd, 2));
      row.push_back(r.adr ? fixed(*r.adr, 2) : "NA");
      row.push_back("");
      table.rows.push_back(row);
      aa += r.aa / n;
      aa_sq += r.aa * r.aa / n;
      pd += r.pd / n;
      if (r.adr) adr += *r.adr / n;
      else adr_ok = false;
    }
    if (!first_aa) first_aa = aa;
    // Sample standard deviation over seeds.
    const double sd = runs.size() > 1 ? std::sqrt(std::max(0.0, (aa_sq - aa * aa) * n / (n - 1))) : 0.0;
    std::vector<std::string> row{dir.filename().string() + "/mean"};
    for (double a : mean_acc) row.push_back(fixed(a, 2));
    row.push_back(fixed(aa, 2));
    row.push_back(fixed(sd, 2));
    row.push_back(fixed(pd, 2));
    row.push_back(adr_ok ? fixed(adr, 2) : "NA");
    row.push_back(fixed(aa - *first_aa, 2));
    mean_rows.push_back(row);
  }
  table.rows.insert(table.rows.end(), mean_rows.begin(), mean_rows.end());
  return table;
}

}  // namespace tfscil
