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

// Typical labels: recursively drop low-probability labels from an aggregated
// distribution until the survivors are stable.

#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vispk/distribution.hpp"
#include "vispk/error.hpp"
#include "vispk/text.hpp"

namespace vispk {

enum class Task { kColor, kSize, kSpatial };

inline std::string to_string(Task t) {
  switch (t) {
    case Task::kColor: return "color";
    case Task::kSize: return "size";
    case Task::kSpatial: return "spatial";
  }
  return "";
}

inline Task parse_task(std::string_view s) {
  if (s == "color") return Task::kColor;
  if (s == "size") return Task::kSize;
  if (s == "spatial") return Task::kSpatial;
  fail("unknown task '" + std::string(s) + "'");
}

// Threshold a label must strictly exceed, given how many labels remain.
inline double p_min(std::size_t n) {
  check(n >= 1 && n <= 11, "p_min defined for 1..11 labels, got " + std::to_string(n));
  if (n >= 4) return 0.10;
  if (n == 3) return 0.20;
  if (n == 2) return 0.30;
  return 0.0;
}

struct TypicalLabelSet {
  std::set<std::string> labels;
  LabelDistribution probs;
  std::size_t cardinality() const { return labels.size(); }
};

namespace detail {

inline std::map<std::string, double> renormalized(const std::map<std::string, double>& m) {
  double total = 0.0;
  for (const auto& [l, p] : m) total += p;
  std::map<std::string, double> out;
  for (const auto& [l, p] : m) out[l] = p / total;
  return out;
}

}  // namespace detail

inline TypicalLabelSet typicalize(const LabelDistribution& dist) {
  std::map<std::string, double> cur;
  for (const auto& [l, p] : dist.probs) {
    check(p >= 0.0, "negative probability for '" + l + "'");
    if (p > 0.0) cur[l] = p;
  }
  check(!cur.empty(), "typicalize on an empty distribution");
  cur = detail::renormalized(cur);

  while (true) {
    const double threshold = p_min(cur.size());
    std::map<std::string, double> kept;
    for (const auto& [l, p] : cur)
      if (p > threshold) kept[l] = p;
    if (kept.size() == cur.size()) break;
    if (kept.empty()) {
      // Everything fell at or below the threshold: keep the most probable
      // label, lexicographically first on ties.
      auto best = cur.begin();
      for (auto it = cur.begin(); it != cur.end(); ++it)
        if (it->second > best->second) best = it;
      kept = {{best->first, 1.0}};
      cur = kept;
      break;
    }
    cur = detail::renormalized(kept);
  }

  TypicalLabelSet out;
  for (const auto& [l, p] : cur) out.labels.insert(l);
  out.probs.probs = cur;
  out.probs.support = dist.support;
  return out;
}

// Gold label set for a task: typical labels for color and spatial, the single
// majority label for size.
inline std::set<std::string> finalize(Task task, const LabelDistribution& dist) {
  if (task != Task::kSize) return typicalize(dist).labels;
  check(!dist.probs.empty(), "finalize on an empty distribution");
  auto best = dist.probs.begin();
  for (auto it = dist.probs.begin(); it != dist.probs.end(); ++it)
    if (it->second > best->second) best = it;
  return {best->first};
}

// ---------------------------------------------------------------------------
// Typical-label file: "key<TAB>label,label<TAB>label:prob ..."

inline std::string typical_to_text(const std::map<std::string, TypicalLabelSet>& sets) {
  std::string out;
  for (const auto& [key, t] : sets) {
    out += key + "\t" + text::join(std::vector<std::string>(t.labels.begin(), t.labels.end()), ",") + "\t" +
           format_probs(t.probs) + "\n";
  }
  return out;
}

inline std::map<std::string, TypicalLabelSet> parse_typical(const std::vector<std::string>& lines) {
  std::map<std::string, TypicalLabelSet> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const auto f = text::split(lines[i], '\t');
    check(f.size() == 3, "typical-label line " + std::to_string(i + 1) + ": expected 3 tab-separated fields");
    TypicalLabelSet t;
    for (const auto& l : text::split(f[1], ',')) t.labels.insert(l);
    t.probs.probs = parse_probs(f[2]);
    out[f[0]] = std::move(t);
  }
  return out;
}

}  // namespace vispk
