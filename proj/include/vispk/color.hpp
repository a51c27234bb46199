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

// Maps free-text color predictions onto the 11 basic color terms and tallies
// them per object.

#pragma once

#include <array>
#include <cctype>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vispk/distribution.hpp"
#include "vispk/error.hpp"
#include "vispk/text.hpp"

namespace vispk {

inline constexpr std::array<std::string_view, 11> kBasicColors = {
    "red", "orange", "yellow", "brown", "green", "blue", "purple", "pink", "white", "gray", "black"};

inline bool is_basic_color(std::string_view s) {
  for (auto c : kBasicColors)
    if (c == s) return true;
  return false;
}

// Raw terms that are not basic colors themselves. A term listed under several
// basic colors maps to all of them.
inline const std::map<std::string, std::vector<std::string>>& raw_color_terms() {
  static const std::map<std::string, std::vector<std::string>> table = {
      {"gold", {"yellow"}},           {"golden", {"yellow"}},   {"blonde", {"yellow"}},
      {"beige", {"yellow", "brown"}}, {"peach", {"yellow", "pink"}},
      {"cream", {"yellow"}},          {"wooden", {"brown"}},    {"tan", {"brown"}},
      {"bronze", {"brown"}},          {"copper", {"brown"}},    {"grey", {"gray"}},
      {"silver", {"gray"}},           {"metal", {"gray"}},      {"steel", {"gray"}},
      {"violet", {"purple"}},         {"maroon", {"red"}},      {"teal", {"green", "blue"}},
      {"turquoise", {"blue"}},
  };
  return table;
}

struct ColorMatch {
  // Basic colors in canonical order, no duplicates.
  std::vector<std::string> colors;
  std::size_t unmapped_tokens = 0;
};

inline ColorMatch canonicalize_color(std::string_view raw_text) {
  std::string s = text::lower(raw_text);
  for (char& c : s)
    if (c == ',' || c == '/') c = ' ';

  std::set<std::string> hits;
  ColorMatch out;
  for (std::string tok : text::split_ws(s)) {
    while (!tok.empty() && !std::isalpha(static_cast<unsigned char>(tok.back()))) tok.pop_back();
    while (!tok.empty() && !std::isalpha(static_cast<unsigned char>(tok.front()))) tok.erase(0, 1);
    if (tok.empty() || tok == "and") continue;
    if (tok == "grey") tok = "gray";
    if (is_basic_color(tok)) {
      hits.insert(tok);
      continue;
    }
    auto it = raw_color_terms().find(tok);
    if (it == raw_color_terms().end()) {
      ++out.unmapped_tokens;
      continue;
    }
    hits.insert(it->second.begin(), it->second.end());
  }
  for (auto c : kBasicColors)
    if (hits.count(std::string(c))) out.colors.emplace_back(c);
  return out;
}

struct ColorObservation {
  std::string object_key;
  std::string raw_text;
};

struct ColorTallies {
  std::map<std::string, LabelTally> tallies;
  std::set<std::string> seen_keys;
  std::size_t unmapped_tokens = 0;
  std::size_t skipped_observations = 0;

  void merge(const ColorTallies& other) {
    for (const auto& [k, t] : other.tallies) tallies[k].merge(t);
    seen_keys.insert(other.seen_keys.begin(), other.seen_keys.end());
    unmapped_tokens += other.unmapped_tokens;
    skipped_observations += other.skipped_observations;
  }
};

// Each basic color counts once per observation it appears in.
inline ColorTallies tally_colors(const std::vector<ColorObservation>& obs) {
  ColorTallies out;
  for (const auto& o : obs) {
    out.seen_keys.insert(o.object_key);
    const ColorMatch m = canonicalize_color(o.raw_text);
    out.unmapped_tokens += m.unmapped_tokens;
    if (m.colors.empty()) {
      ++out.skipped_observations;
      continue;
    }
    LabelTally& t = out.tallies[o.object_key];
    for (const auto& c : m.colors) ++t.counts[c];
    ++t.support;
  }
  return out;
}

struct ColorAggregate {
  std::map<std::string, LabelDistribution> distributions;
  // Keys with no mappable observation at all.
  std::vector<std::string> omitted;
  std::size_t unmapped_tokens = 0;
};

inline ColorAggregate finish_colors(const ColorTallies& t) {
  ColorAggregate out;
  for (const auto& [key, tally] : t.tallies) out.distributions[key] = LabelDistribution::from_tally(tally);
  for (const auto& key : t.seen_keys)
    if (!t.tallies.count(key)) out.omitted.push_back(key);
  out.unmapped_tokens = t.unmapped_tokens;
  return out;
}

inline ColorAggregate aggregate_colors(const std::vector<ColorObservation>& obs) {
  return finish_colors(tally_colors(obs));
}

// ---------------------------------------------------------------------------
// File formats

// "object_key<TAB>raw_text" per line.
inline std::vector<ColorObservation> parse_color_observations(const std::vector<std::string>& lines) {
  std::vector<ColorObservation> obs;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const auto tab = lines[i].find('\t');
    check(tab != std::string::npos && tab > 0,
          "observation line " + std::to_string(i + 1) + ": expected key<TAB>text");
    std::string raw = lines[i].substr(tab + 1);
    check(!text::trim(raw).empty(), "observation line " + std::to_string(i + 1) + ": empty text");
    obs.push_back({lines[i].substr(0, tab), std::move(raw)});
  }
  return obs;
}

// Shared by color and typical-label outputs:
// "key<TAB>label:prob ...<TAB>support".
inline std::string distributions_to_text(const std::map<std::string, LabelDistribution>& dists) {
  std::string out;
  for (const auto& [key, d] : dists) {
    out += key + "\t" + format_probs(d) + "\t" + std::to_string(d.support) + "\n";
  }
  return out;
}

inline std::map<std::string, LabelDistribution> parse_distributions(const std::vector<std::string>& lines) {
  std::map<std::string, LabelDistribution> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const auto f = text::split(lines[i], '\t');
    check(f.size() == 3, "distribution line " + std::to_string(i + 1) + ": expected 3 tab-separated fields");
    LabelDistribution d;
    d.probs = parse_probs(f[1]);
    d.support = static_cast<std::size_t>(text::parse_int(f[2], "support"));
    out[f[0]] = std::move(d);
  }
  return out;
}

}  // namespace vispk
