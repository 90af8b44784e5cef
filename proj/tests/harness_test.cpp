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

#include <set>

#include <gtest/gtest.h>

#include "tfscil/harness.hpp"

namespace tfscil {
namespace {

std::vector<int> balanced_labels(int classes, int per_class) {
  std::vector<int> labels;
  for (int y = 0; y < classes; ++y) {
    for (int i = 0; i < per_class; ++i) labels.push_back(y);
  }
  return labels;
}

TEST(Metrics, HandComputedExample) {
  const Metrics m = metrics({90.0, 60.0, 45.0});
  EXPECT_DOUBLE_EQ(m.aa, 65.0);
  EXPECT_DOUBLE_EQ(m.pd, 45.0);
  ASSERT_TRUE(m.adr.has_value());
  // Relative drops 1/3 and 1/4 over three sessions.
  EXPECT_NEAR(*m.adr, 100.0 * (1.0 / 3.0 + 0.25) / 3.0, 1e-12);
}

TEST(Metrics, ConstantAccuracyHasNoDrop) {
  const Metrics m = metrics({70.0, 70.0, 70.0, 70.0});
  EXPECT_DOUBLE_EQ(m.aa, 70.0);
  EXPECT_DOUBLE_EQ(m.pd, 0.0);
  EXPECT_DOUBLE_EQ(*m.adr, 0.0);
}

TEST(Metrics, ZeroAccuracyLeavesAdrUndefined) {
  const Metrics m = metrics({50.0, 0.0, 10.0});
  EXPECT_FALSE(m.adr.has_value());
  EXPECT_DOUBLE_EQ(m.pd, 40.0);
  EXPECT_THROW(metrics({}), std::invalid_argument);
}

TEST(Metrics, PublishedHapTexRows) {
  const Metrics cat = metrics({96.65, 92.27, 88.21, 86.54, 82.39, 78.74, 76.61, 74.85, 72.51, 70.96});
  EXPECT_NEAR(cat.aa, 81.97, 0.02);
  EXPECT_NEAR(cat.pd, 25.69, 0.02);
  EXPECT_NEAR(*cat.adr, 3.03, 0.02);
  const Metrics orco = metrics({93.25, 89.09, 85.93, 84.04, 80.82, 77.58, 76.09, 73.16, 70.86, 69.95});
  EXPECT_NEAR(orco.aa, 80.08, 0.02);
  EXPECT_NEAR(orco.pd, 23.30, 0.02);
  EXPECT_NEAR(*orco.adr, 2.82, 0.02);
}

TEST(Sessions, DefaultProtocolLayout) {
  const auto labels = balanced_labels(60, 10);
  const ProtocolSpec spec;
  const SessionLedger l = build_sessions(labels, 60, spec);
  ASSERT_EQ(l.session_count(), 10);
  EXPECT_EQ(l.session_classes[0].size(), 15u);
  std::set<int> all;
  for (int s = 0; s < l.session_count(); ++s) {
    if (s > 0) {
      EXPECT_EQ(l.session_classes[s].size(), 5u);
      EXPECT_EQ(l.supports[s].size(), 25u);
    }
    all.insert(l.session_classes[s].begin(), l.session_classes[s].end());
  }
  EXPECT_EQ(all.size(), 60u);
  EXPECT_EQ(l.tests_up_to(9).size(), 60u * 2);
  EXPECT_EQ(l.classes_up_to(2).size(), 25u);
}

TEST(Sessions, SupportsHoldKSamplesOfTheirClass) {
  const auto labels = balanced_labels(30, 12);
  ProtocolSpec spec;
  spec.sessions = 3;
  spec.shots = 3;
  const SessionLedger l = build_sessions(labels, 30, spec);
  for (int s = 1; s < l.session_count(); ++s) {
    for (int y : l.session_classes[s]) {
      int count = 0;
      for (Index i : l.supports[s]) count += labels[static_cast<std::size_t>(i)] == y;
      EXPECT_EQ(count, 3);
    }
  }
}

TEST(Sessions, SeedChangesOrderButIsReproducible) {
  const auto labels = balanced_labels(40, 10);
  ProtocolSpec a;
  a.sessions = 4;
  ProtocolSpec b = a;
  b.seed = 2;
  EXPECT_EQ(build_sessions(labels, 40, a).session_classes, build_sessions(labels, 40, a).session_classes);
  EXPECT_NE(build_sessions(labels, 40, a).session_classes, build_sessions(labels, 40, b).session_classes);
}

TEST(Sessions, RejectsImpossibleProtocols) {
  const auto labels = balanced_labels(20, 10);
  EXPECT_THROW(build_sessions(labels, 20, ProtocolSpec{}), std::invalid_argument);
  ProtocolSpec greedy;
  greedy.sessions = 2;
  greedy.shots = 9;
  EXPECT_THROW(build_sessions(labels, 20, greedy), std::invalid_argument);
  ProtocolSpec bad;
  bad.test_fraction = 1.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Sessions, InvariantCheckCatchesLeaks) {
  const auto labels = balanced_labels(20, 10);
  ProtocolSpec spec;
  spec.sessions = 2;
  SessionLedger l = build_sessions(labels, 20, spec);
  SessionLedger dup = l;
  dup.session_classes[2].push_back(dup.session_classes[1].front());
  EXPECT_THROW(dup.check_invariants(spec.shots), std::logic_error);
  SessionLedger leak = l;
  leak.supports[1].front() = leak.class_tests[static_cast<std::size_t>(leak.session_classes[1].front())].front();
  EXPECT_THROW(leak.check_invariants(spec.shots), std::logic_error);
  SessionLedger short_shot = l;
  short_shot.supports[2].pop_back();
  EXPECT_THROW(short_shot.check_invariants(spec.shots), std::logic_error);
}

TEST(Evaluate, FractionCorrect) {
  const std::vector<int> labels{0, 1, 1, 2};
  EXPECT_DOUBLE_EQ(evaluate({0, 1, 2, 3}, labels, [](Index i) { return i == 3 ? 0 : int(i > 0); }), 0.75);
  EXPECT_THROW(evaluate({}, labels, [](Index) { return 0; }), std::invalid_argument);
}

TEST(Coverage, MissingRecordNamed) {
  ClassRecord r;
  r.id = 4;
  try {
    require_coverage({r}, {4, 9});
    FAIL() << "expected a throw";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("9"), std::string::npos);
  }
}

}  // namespace
}  // namespace tfscil
