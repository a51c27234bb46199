// Copyright 2026 The vispk Authors.
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

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "vispk/color.hpp"
#include "vispk/labels.hpp"

namespace vispk {
namespace {

LabelDistribution dist(std::map<std::string, double> m) {
  LabelDistribution d;
  d.probs = std::move(m);
  d.support = 10;
  return d;
}

TEST(PMin, Schedule) {
  EXPECT_DOUBLE_EQ(p_min(5), 0.10);
  EXPECT_DOUBLE_EQ(p_min(4), 0.10);
  EXPECT_DOUBLE_EQ(p_min(11), 0.10);
  EXPECT_DOUBLE_EQ(p_min(3), 0.20);
  EXPECT_DOUBLE_EQ(p_min(2), 0.30);
  EXPECT_DOUBLE_EQ(p_min(1), 0.0);
  EXPECT_THROW(p_min(0), Error);
  EXPECT_THROW(p_min(12), Error);
}

TEST(Typicalize, WorkedTrace) {
  const auto t = typicalize(dist({{"white", 0.5}, {"black", 0.4}, {"red", 0.1}}));
  EXPECT_EQ(t.labels, (std::set<std::string>{"white", "black"}));
  EXPECT_NEAR(t.probs.prob("white"), 5.0 / 9.0, 1e-9);
  EXPECT_NEAR(t.probs.prob("black"), 4.0 / 9.0, 1e-9);
  EXPECT_EQ(t.cardinality(), 2u);
}

TEST(Typicalize, PointMassUnchanged) {
  const auto t = typicalize(dist({{"blue", 1.0}}));
  EXPECT_EQ(t.labels, std::set<std::string>{"blue"});
  EXPECT_DOUBLE_EQ(t.probs.prob("blue"), 1.0);
}

TEST(Typicalize, UniformOverElevenKeepsArgmax) {
  std::map<std::string, double> m;
  for (auto c : kBasicColors) m[std::string(c)] = 1.0 / 11.0;
  const auto t = typicalize(dist(m));
  // Every label ties; the lexicographically first one survives.
  EXPECT_EQ(t.labels, std::set<std::string>{"black"});
}

TEST(Typicalize, RecursesUntilStable) {
  // n=4: .37 .3 .25 .08 -> drop .08
  // n=3: .402 .326 .272 -> all > .20, stable
  const auto t = typicalize(dist({{"a", 0.37}, {"b", 0.3}, {"c", 0.25}, {"d", 0.08}}));
  EXPECT_EQ(t.labels, (std::set<std::string>{"a", "b", "c"}));
  // n=3: .5 .3 .2 -> .2 dropped; n=2: .625 .375 survive
  EXPECT_EQ(typicalize(dist({{"a", 0.5}, {"b", 0.3}, {"c", 0.2}})).labels, (std::set<std::string>{"a", "b"}));
  // n=2: .7 .3 -> .3 is not > .30
  EXPECT_EQ(typicalize(dist({{"a", 0.7}, {"b", 0.3}})).labels, std::set<std::string>{"a"});
}

TEST(Typicalize, ZeroEntriesIgnored) {
  const auto t = typicalize(dist({{"a", 0.6}, {"b", 0.4}, {"c", 0.0}, {"d", 0.0}}));
  EXPECT_EQ(t.labels, (std::set<std::string>{"a", "b"}));
}

TEST(Finalize, PerTask) {
  EXPECT_EQ(finalize(Task::kColor, dist({{"red", 0.6}, {"green", 0.4}})), (std::set<std::string>{"green", "red"}));
  EXPECT_EQ(finalize(Task::kSpatial, dist({{"above", 1.0}})), std::set<std::string>{"above"});
  EXPECT_EQ(finalize(Task::kSize, dist({{"smaller", 0.9}, {"larger", 0.1}})), std::set<std::string>{"smaller"});
}

LabelDistribution random_dist(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = 1 + rng() % 11;
  std::map<std::string, double> m;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double w = u(rng);
    if (rng() % 5 == 0) w *= 0.05;  // some tiny labels
    m[std::string(kBasicColors[i])] = w;
    total += w;
  }
  for (auto& [l, p] : m) p /= total;
  return dist(m);
}

TEST(TypicalizeProperties, IdempotentAndAboveThreshold) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 2000; ++t) {
    const auto d = random_dist(rng);
    const auto once = typicalize(d);
    const auto twice = typicalize(once.probs);
    EXPECT_EQ(once.labels, twice.labels);
    for (const auto& [l, p] : once.probs.probs) EXPECT_NEAR(twice.probs.prob(l), p, 1e-12);
    EXPECT_NEAR(once.probs.sum(), 1.0, 1e-9);
    EXPECT_LE(once.cardinality(), d.probs.size());
    EXPECT_GE(once.cardinality(), 1u);
    for (const auto& [l, p] : once.probs.probs) EXPECT_GT(p, oracle::p_min_reference(once.cardinality()));
  }
}

TEST(TypicalFiles, RoundTrip) {
  std::map<std::string, TypicalLabelSet> m;
  m["cup"] = typicalize(dist({{"white", 0.5}, {"black", 0.4}, {"red", 0.1}}));
  const auto back = parse_typical(text::split(typical_to_text(m), '\n'));
  EXPECT_EQ(back.at("cup").labels, m["cup"].labels);
  EXPECT_EQ(back.at("cup").probs.probs, m["cup"].probs.probs);
}

}  // namespace
}  // namespace vispk
