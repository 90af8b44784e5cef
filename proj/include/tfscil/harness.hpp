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

#ifndef TFSCIL_HARNESS_HPP_
#define TFSCIL_HARNESS_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tfscil/ucpc.hpp"

namespace tfscil {

struct ProtocolSpec {
  int ways = 5;             // N
  int shots = 5;            // K
  int sessions = 9;         // S incremental sessions
  int base_class_count = 0; // 0: total classes - N * S
  double test_fraction = 0.2;
  std::uint64_t seed = 1;

  void validate() const;
  int resolved_base(int total_classes) const;
  friend bool operator==(const ProtocolSpec&, const ProtocolSpec&) = default;
};

// Session structure over dataset indices plus the accuracies filled in
// while the protocol runs. Session 0 is the base session.
struct SessionLedger {
  std::vector<std::vector<int>> session_classes;
  std::vector<std::vector<Index>> supports;   // per session, sample indices
  std::vector<std::vector<Index>> class_tests;  // per class id, test indices
  std::vector<double> accuracies;             // fraction in [0, 1], per completed session

  int session_count() const { return static_cast<int>(session_classes.size()); }
  std::vector<int> classes_up_to(int session) const;
  std::vector<Index> tests_up_to(int session) const;
  // Throws std::logic_error naming the violated invariant.
  void check_invariants(int shots) const;
};

SessionLedger build_sessions(const std::vector<int>& labels, int class_count, const ProtocolSpec& spec);

// Fraction of `tests` whose prediction equals the true label.
double evaluate(const std::vector<Index>& tests, const std::vector<int>& labels,
                const std::function<int(Index)>& predict);

// Records must cover every class of `classes`; throws naming the first
// missing id.
void require_coverage(const std::vector<ClassRecord>& records, const std::vector<int>& classes);

struct Metrics {
  double aa = 0;
  double pd = 0;
  std::optional<double> adr;  // percent; undefined when some Acc is 0
};

// acc in any consistent unit. ADR sums the relative drops between
// consecutive sessions and divides by the number of sessions, in percent.
Metrics metrics(const std::vector<double>& acc);

}  // namespace tfscil

#endif  // TFSCIL_HARNESS_HPP_
