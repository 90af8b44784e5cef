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

#include "tfscil/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

#include "tfscil/rng.hpp"

namespace tfscil {

void ProtocolSpec::validate() const {
  if (ways < 1 || shots < 1) throw std::invalid_argument("ProtocolSpec: ways and shots must be >= 1");
  if (sessions < 0) throw std::invalid_argument("ProtocolSpec: sessions must be >= 0");
  if (base_class_count < 0) throw std::invalid_argument("ProtocolSpec: base_class_count must be >= 0");
  if (!(test_fraction > 0 && test_fraction < 1)) {
    throw std::invalid_argument("ProtocolSpec: test_fraction must lie in (0, 1)");
  }
}

int ProtocolSpec::resolved_base(int total_classes) const {
  return base_class_count > 0 ? base_class_count : total_classes - ways * sessions;
}

std::vector<int> SessionLedger::classes_up_to(int session) const {
  std::vector<int> out;
  for (int s = 0; s <= session; ++s) {
    out.insert(out.end(), session_classes.at(s).begin(), session_classes.at(s).end());
  }
  return out;
}

std::vector<Index> SessionLedger::tests_up_to(int session) const {
  std::vector<Index> out;
  for (int y : classes_up_to(session)) out.insert(out.end(), class_tests.at(y).begin(), class_tests.at(y).end());
  return out;
}

void SessionLedger::check_invariants(int shots) const {
  std::set<int> seen;
  for (int s = 0; s < session_count(); ++s) {
    for (int y : session_classes[s]) {
      if (!seen.insert(y).second) {
        throw std::logic_error("ledger: class " + std::to_string(y) + " appears in more than one session");
      }
    }
    std::set<Index> support(supports[s].begin(), supports[s].end());
    if (support.size() != supports[s].size()) throw std::logic_error("ledger: duplicate support index");
    if (s > 0 && supports[s].size() != session_classes[s].size() * static_cast<std::size_t>(shots)) {
      throw std::logic_error("ledger: session " + std::to_string(s) + " support is not K-shot");
    }
    for (int y : session_classes[s]) {
      for (Index i : class_tests.at(y)) {
        if (support.count(i)) throw std::logic_error("ledger: test index inside a support set");
      }
    }
  }
}

SessionLedger build_sessions(const std::vector<int>& labels, int class_count, const ProtocolSpec& spec) {
  spec.validate();
  const int base = spec.resolved_base(class_count);
  if (base < 1 || base + spec.ways * spec.sessions > class_count) {
    throw std::invalid_argument("build_sessions: " + std::to_string(class_count) + " classes cannot host base " +
                                std::to_string(base) + " + " + std::to_string(spec.ways) + "x" +
                                std::to_string(spec.sessions) + " novel classes");
  }
  std::vector<std::vector<Index>> by_class(static_cast<std::size_t>(class_count));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || y >= class_count) throw std::out_of_range("build_sessions: label out of range");
    by_class[static_cast<std::size_t>(y)].push_back(static_cast<Index>(i));
  }

  std::vector<int> order(static_cast<std::size_t>(class_count));
  std::iota(order.begin(), order.end(), 0);
  Rng class_rng = make_rng(spec.seed, Stream::kSplit, 0);
  std::shuffle(order.begin(), order.end(), class_rng);

  SessionLedger ledger;
  ledger.session_classes.emplace_back(order.begin(), order.begin() + base);
  for (int s = 0; s < spec.sessions; ++s) {
    auto first = order.begin() + base + s * spec.ways;
    ledger.session_classes.emplace_back(first, first + spec.ways);
  }
  ledger.class_tests.resize(static_cast<std::size_t>(class_count));
  ledger.supports.resize(ledger.session_classes.size());

  for (int s = 0; s < ledger.session_count(); ++s) {
    std::sort(ledger.session_classes[s].begin(), ledger.session_classes[s].end());
    for (int y : ledger.session_classes[s]) {
      std::vector<Index> idx = by_class[static_cast<std::size_t>(y)];
      Rng rng = make_rng(spec.seed, Stream::kSplit, 1 + static_cast<std::uint64_t>(y));
      std::shuffle(idx.begin(), idx.end(), rng);
      const auto n = static_cast<Index>(idx.size());
      const Index n_test = std::max<Index>(1, static_cast<Index>(std::lround(spec.test_fraction * double(n))));
      const Index need = n_test + (s > 0 ? spec.shots : 1);
      if (n < need) {
        throw std::invalid_argument("build_sessions: class " + std::to_string(y) + " has " + std::to_string(n) +
                                    " samples, needs " + std::to_string(need));
      }
      auto& tests = ledger.class_tests[static_cast<std::size_t>(y)];
      tests.assign(idx.begin(), idx.begin() + n_test);
      std::sort(tests.begin(), tests.end());
      const Index n_support = s > 0 ? spec.shots : n - n_test;
      auto& support = ledger.supports[static_cast<std::size_t>(s)];
      support.insert(support.end(), idx.begin() + n_test, idx.begin() + n_test + n_support);
    }
  }
  ledger.check_invariants(spec.shots);
  return ledger;
}

double evaluate(const std::vector<Index>& tests, const std::vector<int>& labels,
                const std::function<int(Index)>& predict) {
  if (tests.empty()) throw std::invalid_argument("evaluate: empty test set");
  Index correct = 0;
  for (Index i : tests) correct += predict(i) == labels.at(static_cast<std::size_t>(i)) ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(tests.size());
}

void require_coverage(const std::vector<ClassRecord>& records, const std::vector<int>& classes) {
  std::set<int> have;
  for (const auto& r : records) have.insert(r.id);
  for (int y : classes) {
    if (!have.count(y)) throw std::invalid_argument("evaluate: missing record for class " + std::to_string(y));
  }
}

Metrics metrics(const std::vector<double>& acc) {
  if (acc.empty()) throw std::invalid_argument("metrics: no accuracies");
  Metrics m;
  m.aa = std::accumulate(acc.begin(), acc.end(), 0.0) / static_cast<double>(acc.size());
  m.pd = acc.front() - acc.back();
  if (acc.size() < 2) {
    m.adr = 0.0;
    return m;
  }
  if (std::find(acc.begin(), acc.end(), 0.0) != acc.end()) return m;
  double drop = 0;
  for (std::size_t l = 0; l + 1 < acc.size(); ++l) {
    drop += (acc[l] - acc[l + 1]) / acc[l];
  }
  // Normalized by the session count including the base session, which
  // reproduces the published HapTex and LMT108 tables.
  m.adr = 100.0 * drop / static_cast<double>(acc.size());
  return m;
}

}  // namespace tfscil
