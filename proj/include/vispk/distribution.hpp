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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "vispk/error.hpp"
#include "vispk/text.hpp"

namespace vispk {

// Raw label counts plus the number of observations that contributed. Merging
// is commutative and associative, so partial tallies can be combined in any
// order.
struct LabelTally {
  std::map<std::string, std::size_t> counts;
  std::size_t support = 0;

  void merge(const LabelTally& other) {
    for (const auto& [label, n] : other.counts) counts[label] += n;
    support += other.support;
  }

  std::size_t total() const {
    std::size_t t = 0;
    for (const auto& [label, n] : counts) t += n;
    return t;
  }

  friend bool operator==(const LabelTally&, const LabelTally&) = default;
};

// Normalised probabilities over a finite label set.
struct LabelDistribution {
  std::map<std::string, double> probs;
  std::size_t support = 0;

  static LabelDistribution from_tally(const LabelTally& t) {
    const double total = static_cast<double>(t.total());
    check(total > 0.0, "cannot normalise an empty tally");
    LabelDistribution d;
    for (const auto& [label, n] : t.counts)
      if (n > 0) d.probs[label] = static_cast<double>(n) / total;
    d.support = t.support;
    return d;
  }

  double prob(const std::string& label) const {
    auto it = probs.find(label);
    return it == probs.end() ? 0.0 : it->second;
  }

  double sum() const {
    double s = 0.0;
    for (const auto& [label, p] : probs) s += p;
    return s;
  }

  // Labels by descending probability; equal probabilities keep label order.
  std::vector<std::pair<std::string, double>> sorted() const {
    std::vector<std::pair<std::string, double>> v(probs.begin(), probs.end());
    std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return v;
  }
};

// "label:prob label:prob ..." in descending probability.
inline std::string format_probs(const LabelDistribution& d) {
  std::string out;
  for (const auto& [label, p] : d.sorted()) {
    if (!out.empty()) out += ' ';
    out += label + ":" + text::format_double(p);
  }
  return out;
}

inline std::map<std::string, double> parse_probs(std::string_view field) {
  std::map<std::string, double> out;
  for (const auto& pair : text::split_ws(field)) {
    const auto colon = pair.rfind(':');
    check(colon != std::string::npos && colon > 0, "expected label:prob, got '" + pair + "'");
    const std::string label = pair.substr(0, colon);
    check(out.count(label) == 0, "duplicate label '" + label + "'");
    out[label] = text::parse_double(pair.substr(colon + 1), "probability of " + label);
  }
  return out;
}

}  // namespace vispk
