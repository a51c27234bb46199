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

// Relative-size relations.
//
// Per scene, each object's perceived size (region area times mean depth to
// the power gamma) is clustered with natural breaks; every pair of
// differently named objects in different clusters yields one "smaller"
// relation. Relations are then tallied across scenes, resolved by majority
// and balanced with their complements.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "vispk/error.hpp"
#include "vispk/jenks.hpp"
#include "vispk/scene.hpp"
#include "vispk/subtype.hpp"
#include "vispk/text.hpp"

namespace vispk {

inline const std::string kSmaller = "smaller";
inline const std::string kLarger = "larger";

inline const std::string& inverse_size_label(const std::string& label) {
  if (label == kSmaller) return kLarger;
  if (label == kLarger) return kSmaller;
  fail("unknown size label '" + label + "'");
}

// One aggregated (subject, relation, object) triple and its supporting counts.
struct RelationRecord {
  std::string subject;
  std::string relation;
  std::string object;
  std::map<std::string, std::size_t> counts;
  std::optional<std::string> scene_type;

  std::size_t support() const {
    std::size_t s = 0;
    for (const auto& [label, n] : counts) s += n;
    return s;
  }

  friend bool operator==(const RelationRecord&, const RelationRecord&) = default;
};

inline bool record_less(const RelationRecord& a, const RelationRecord& b) {
  return std::tie(a.subject, a.object, a.relation) < std::tie(b.subject, b.object, b.relation);
}

struct SizePair {
  std::string smaller;
  std::string larger;
  friend bool operator==(const SizePair&, const SizePair&) = default;
  friend auto operator<=>(const SizePair&, const SizePair&) = default;
};

inline double perceived_size(const Region& r, const DepthRaster& d, int gamma = 1) {
  check(gamma == 1 || gamma == 2, "gamma must be 1 or 2");
  const double depth = region_mean_depth(r, d);
  check(depth > 0.0, "object at zero depth");
  return region_area(r) * std::pow(depth, gamma);
}

// Pairs (a smaller b) for objects in different size clusters. The cluster
// count drops to the number of distinct sizes when fewer are available, so
// equal sizes never yield a relation.
inline std::vector<SizePair> scene_size_relations(const Scene& s, const DepthRaster& d, int clusters = 5,
                                                  int gamma = 1) {
  check(clusters >= 1, "cluster count must be >= 1");
  if (s.objects.size() < 2) return {};
  std::vector<double> sizes;
  sizes.reserve(s.objects.size());
  for (const auto& o : s.objects) {
    try {
      sizes.push_back(perceived_size(o.region, d, gamma));
    } catch (const Error& e) {
      fail("scene '" + s.image_id + "', instance '" + o.instance_id + "': " + e.what());
    }
  }
  const std::size_t distinct = std::set<double>(sizes.begin(), sizes.end()).size();
  const int k = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(clusters), distinct));
  const auto cluster = jenks_breaks(sizes, k).assignment;

  std::vector<SizePair> out;
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    for (std::size_t j = i + 1; j < s.objects.size(); ++j) {
      const auto& a = s.objects[i];
      const auto& b = s.objects[j];
      if (a.name == b.name) continue;
      if (cluster[i] < cluster[j]) out.push_back({a.name, b.name});
      else if (cluster[j] < cluster[i]) out.push_back({b.name, a.name});
    }
  }
  return out;
}

// Count-merge of directed pair events keyed by the lexicographically ordered
// pair (subject < object). Commutative, so per-scene tallies merge in any order.
struct SizeTally {
  std::map<std::pair<std::string, std::string>, std::map<std::string, std::size_t>> counts;

  void add(const SizePair& p) {
    if (p.smaller < p.larger) ++counts[{p.smaller, p.larger}][kSmaller];
    else ++counts[{p.larger, p.smaller}][kLarger];
  }
  void merge(const SizeTally& o) {
    for (const auto& [key, c] : o.counts)
      for (const auto& [label, n] : c) counts[key][label] += n;
  }
};

inline std::vector<RelationRecord> resolve_size(const SizeTally& tally, std::size_t min_support = 5) {
  check(min_support >= 1, "min_support must be >= 1");
  std::vector<RelationRecord> out;
  for (const auto& [key, c] : tally.counts) {
    const std::size_t ns = c.count(kSmaller) ? c.at(kSmaller) : 0;
    const std::size_t nl = c.count(kLarger) ? c.at(kLarger) : 0;
    if (ns + nl < min_support || ns == nl) continue;
    RelationRecord r{key.first, ns > nl ? kSmaller : kLarger, key.second, {}, std::nullopt};
    r.counts[kSmaller] = ns;
    r.counts[kLarger] = nl;
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<RelationRecord> aggregate_size(const std::vector<SizePair>& pairs,
                                                  std::size_t min_support = 5) {
  SizeTally t;
  for (const auto& p : pairs) t.add(p);
  return resolve_size(t, min_support);
}

inline RelationRecord size_complement(const RelationRecord& r) {
  RelationRecord c{r.object, inverse_size_label(r.relation), r.subject, {}, r.scene_type};
  for (const auto& [label, n] : r.counts) c.counts[inverse_size_label(label)] = n;
  return c;
}

// Adds the inverse of every record; output sorted, without duplicates.
inline std::vector<RelationRecord> balance_complements(const std::vector<RelationRecord>& records) {
  std::vector<RelationRecord> out;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  auto push = [&](RelationRecord r) {
    if (seen.insert({r.subject, r.relation, r.object}).second) out.push_back(std::move(r));
  };
  for (const auto& r : records) {
    push(r);
    push(size_complement(r));
  }
  std::sort(out.begin(), out.end(), record_less);
  return out;
}

// One-step closure over "smaller" edges: a < b and b < c proposes a < c for
// pairs the standard set does not already cover. Pairs proposed in both
// directions (cycles in noisy data) are dropped. counts[smaller] holds the
// number of distinct intermediate objects.
inline std::vector<RelationRecord> build_transitive_set(const std::vector<RelationRecord>& standard) {
  std::map<std::string, std::set<std::string>> succ;
  std::set<std::pair<std::string, std::string>> covered;
  for (const auto& r : standard) {
    covered.insert(std::minmax(r.subject, r.object));
    if (r.relation == kSmaller) succ[r.subject].insert(r.object);
    else if (r.relation == kLarger) succ[r.object].insert(r.subject);
    else fail("unknown size label '" + r.relation + "'");
  }

  std::map<std::pair<std::string, std::string>, std::size_t> cand;
  for (const auto& [a, mids] : succ) {
    for (const auto& b : mids) {
      auto it = succ.find(b);
      if (it == succ.end()) continue;
      for (const auto& c : it->second) {
        if (c == a || covered.count(std::minmax(a, c))) continue;
        ++cand[{a, c}];
      }
    }
  }

  std::vector<RelationRecord> base;
  for (const auto& [key, n] : cand) {
    if (cand.count({key.second, key.first})) continue;
    RelationRecord r{key.first, kSmaller, key.second, {}, std::nullopt};
    r.counts[kSmaller] = n;
    r.counts[kLarger] = 0;
    base.push_back(std::move(r));
  }
  return balance_complements(base);
}

// Replays each record with its subject swapped for every known subtype of it.
inline std::vector<RelationRecord> build_subtype_set(const std::vector<RelationRecord>& test,
                                                     const CandidateMap& cmap) {
  std::vector<RelationRecord> out;
  for (const auto& r : test) {
    auto it = cmap.find(r.subject);
    if (it == cmap.end()) continue;
    for (const auto& s : it->second) {
      if (s == r.subject) continue;
      RelationRecord copy = r;
      copy.subject = s;
      out.push_back(std::move(copy));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Relation file: "subject<TAB>relation<TAB>object<TAB>label:n label:n ..."

inline std::string relations_to_text(const std::vector<RelationRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.subject + "\t" + r.relation + "\t" + r.object + "\t";
    bool first = true;
    for (const auto& [label, n] : r.counts) {
      if (!first) out += ' ';
      first = false;
      out += label + ":" + std::to_string(n);
    }
    out += '\n';
  }
  return out;
}

inline std::vector<RelationRecord> parse_relations(const std::vector<std::string>& lines) {
  std::vector<RelationRecord> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const auto f = text::split(lines[i], '\t');
    check(f.size() == 4, "relation line " + std::to_string(i + 1) + ": expected 4 tab-separated fields");
    RelationRecord r{f[0], f[1], f[2], {}, std::nullopt};
    for (const auto& pair : text::split_ws(f[3])) {
      const auto colon = pair.rfind(':');
      check(colon != std::string::npos, "relation line " + std::to_string(i + 1) + ": bad count '" + pair + "'");
      r.counts[pair.substr(0, colon)] =
          static_cast<std::size_t>(text::parse_int(pair.substr(colon + 1), "relation count"));
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace vispk
