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

// Scene-conditioned relative elevation.
//
// Perspective makes image height a poor proxy for elevation when objects sit
// at different depths. Objects are therefore grouped into overlapping depth
// windows and compared directly only inside a shared window. Pairs that never
// share a window are linked through "bridge" objects whose depth falls in an
// overlap band, composing the two direct relations.

#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "vispk/distribution.hpp"
#include "vispk/error.hpp"
#include "vispk/scene.hpp"
#include "vispk/text.hpp"

namespace vispk {

inline const std::string kAbove = "above";
inline const std::string kBelow = "below";
inline const std::string kSimilar = "similar";

inline const std::string& inverse_spatial(const std::string& rel) {
  if (rel == kAbove) return kBelow;
  if (rel == kBelow) return kAbove;
  if (rel == kSimilar) return kSimilar;
  fail("unknown spatial relation '" + rel + "'");
}

struct DepthWindow {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double d) const { return d >= lo && d <= hi; }
};

struct DepthPartitioning {
  int n_partitions = 0;
  std::vector<DepthWindow> windows;
  std::map<std::string, std::set<int>> membership;

  bool share(const std::string& a, const std::string& b) const {
    const auto& ma = membership.at(a);
    const auto& mb = membership.at(b);
    return std::any_of(ma.begin(), ma.end(), [&](int p) { return mb.count(p) > 0; });
  }
  bool dual(const std::string& id) const { return membership.at(id).size() >= 2; }
};

struct ObjectDepth {
  std::string instance_id;
  double mean_depth = 0.0;
};

// n equal-width windows over [d_min, d_max] with stride w * (1 - overlap);
// the width w is chosen so the last window ends at d_max.
inline DepthPartitioning partition_by_depth(const std::vector<ObjectDepth>& objs, int n = 3,
                                            double overlap = 0.5) {
  check(!objs.empty(), "partition_by_depth needs at least one object");
  check(n >= 1, "partition count must be >= 1");
  check(overlap > 0.0 && overlap < 1.0, "overlap must lie in (0, 1)");

  double d_min = objs[0].mean_depth, d_max = objs[0].mean_depth;
  for (const auto& o : objs) {
    d_min = std::min(d_min, o.mean_depth);
    d_max = std::max(d_max, o.mean_depth);
  }

  DepthPartitioning p;
  p.n_partitions = n;
  if (d_min == d_max || n == 1) {
    p.windows.push_back({d_min, d_max});
  } else {
    const double range = d_max - d_min;
    const double width = range / (1.0 + (n - 1) * (1.0 - overlap));
    const double stride = width * (1.0 - overlap);
    for (int i = 0; i < n; ++i) {
      const double lo = d_min + i * stride;
      p.windows.push_back({lo, i == n - 1 ? d_max : lo + width});
    }
  }
  for (const auto& o : objs) {
    auto& m = p.membership[o.instance_id];
    for (std::size_t i = 0; i < p.windows.size(); ++i)
      if (p.windows[i].contains(o.mean_depth)) m.insert(static_cast<int>(i));
    check(!m.empty(), "object '" + o.instance_id + "' fell outside every depth window");
  }
  return p;
}

// Relation of a to b in image space (y grows downward): a is above b when
// a's lowest point is higher than b's centroid. If the test fires both ways
// (interleaved shapes) the pair is similar.
inline const std::string& elevation_relation(const Region& a, const Region& b) {
  const bool a_above = region_lowest_point_y(a) < region_centroid(b).y;
  const bool b_above = region_lowest_point_y(b) < region_centroid(a).y;
  if (a_above && !b_above) return kAbove;
  if (b_above && !a_above) return kBelow;
  return kSimilar;
}

inline const std::string& elevation_relation(const ObjectInstance& a, const ObjectInstance& b) {
  return elevation_relation(a.region, b.region);
}

// a∘b for "x rel1 y" and "y rel2 z". Returns nullptr for contradictory
// chains (above then below, or the reverse).
inline const std::string* compose_spatial(const std::string& r1, const std::string& r2) {
  // Canonical storage so callers can compare by address or value.
  auto canon = [](const std::string& r) { return &inverse_spatial(inverse_spatial(r)); };
  if (r1 == kSimilar) return canon(r2);
  if (r2 == kSimilar || r2 == r1) return canon(r1);
  return nullptr;
}

struct SpatialObservation {
  SceneType scene_type = SceneType::kBedroom;
  std::string subject;
  std::string object;
  std::string relation;
  std::string subject_instance;
  std::string object_instance;

  friend bool operator==(const SpatialObservation&, const SpatialObservation&) = default;
};

inline std::vector<ObjectDepth> object_depths(const Scene& s, const DepthRaster& d) {
  std::vector<ObjectDepth> out;
  for (const auto& o : s.objects) out.push_back({o.instance_id, region_mean_depth(o.region, d)});
  return out;
}

// Direct comparisons for every pair of differently named objects sharing at
// least one window. Each pair appears once, in scene order.
inline std::vector<SpatialObservation> intra_partition_relations(const Scene& s,
                                                                 const DepthPartitioning& p) {
  check(s.scene_type.has_value(), "scene '" + s.image_id + "' has no scene_type");
  std::vector<SpatialObservation> out;
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    for (std::size_t j = i + 1; j < s.objects.size(); ++j) {
      const auto& a = s.objects[i];
      const auto& b = s.objects[j];
      if (a.name == b.name || !p.share(a.instance_id, b.instance_id)) continue;
      out.push_back({*s.scene_type, a.name, b.name, elevation_relation(a, b), a.instance_id, b.instance_id});
    }
  }
  return out;
}

// Relations for pairs that share no window, derived through bridge objects
// with dual membership. Each round composes relations known from earlier
// rounds (direct ones first), so chains through several bridges are reached
// one bridge at a time. Bridges vote; contradictory chains abstain and a tied
// vote resolves to similar.
inline std::vector<SpatialObservation> transitive_relations(const Scene& s, const DepthPartitioning& p) {
  check(s.scene_type.has_value(), "scene '" + s.image_id + "' has no scene_type");
  const std::size_t n = s.objects.size();
  // known[i][j] is the relation of object i to object j, or nullptr.
  std::vector<std::vector<const std::string*>> known(n, std::vector<const std::string*>(n, nullptr));
  std::vector<bool> is_bridge(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    is_bridge[i] = p.dual(s.objects[i].instance_id);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || !p.share(s.objects[i].instance_id, s.objects[j].instance_id)) continue;
      known[i][j] = &elevation_relation(s.objects[i], s.objects[j]);
    }
  }

  std::vector<std::pair<std::size_t, std::size_t>> derived;
  while (true) {
    std::vector<std::tuple<std::size_t, std::size_t, const std::string*>> fresh;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (known[i][j]) continue;
        std::array<int, 3> votes{0, 0, 0};  // above, below, similar
        bool any = false;
        for (std::size_t b = 0; b < n; ++b) {
          if (!is_bridge[b] || b == i || b == j || !known[i][b] || !known[b][j]) continue;
          const std::string* r = compose_spatial(*known[i][b], *known[b][j]);
          if (!r) continue;
          any = true;
          ++votes[*r == kAbove ? 0 : *r == kBelow ? 1 : 2];
        }
        if (!any) continue;
        const int top = *std::max_element(votes.begin(), votes.end());
        const int winners = static_cast<int>(std::count(votes.begin(), votes.end(), top));
        const std::string* rel = winners > 1 ? &kSimilar : votes[0] == top ? &kAbove : votes[1] == top ? &kBelow : &kSimilar;
        fresh.emplace_back(i, j, rel);
      }
    }
    if (fresh.empty()) break;
    for (const auto& [i, j, rel] : fresh) {
      known[i][j] = rel;
      known[j][i] = &inverse_spatial(*rel);
      derived.emplace_back(i, j);
    }
  }

  std::sort(derived.begin(), derived.end());
  std::vector<SpatialObservation> out;
  for (const auto& [i, j] : derived) {
    const auto& a = s.objects[i];
    const auto& b = s.objects[j];
    if (a.name == b.name) continue;
    out.push_back({*s.scene_type, a.name, b.name, *known[i][j], a.instance_id, b.instance_id});
  }
  return out;
}

struct SpatialExtraction {
  std::vector<SpatialObservation> intra;
  std::vector<SpatialObservation> transitive;
};

inline SpatialExtraction extract_spatial(const Scene& s, const DepthRaster& d, int partitions = 3,
                                         double overlap = 0.5) {
  if (s.objects.size() < 2) return {};
  const auto p = partition_by_depth(object_depths(s, d), partitions, overlap);
  return {intra_partition_relations(s, p), transitive_relations(s, p)};
}

// (scene type, subject, object) with subject < object.
using SpatialKey = std::tuple<std::string, std::string, std::string>;

struct SpatialTally {
  std::map<SpatialKey, LabelTally> tallies;

  void add(const SpatialObservation& o) {
    const bool swap = o.object < o.subject;
    const SpatialKey key{to_string(o.scene_type), swap ? o.object : o.subject, swap ? o.subject : o.object};
    LabelTally& t = tallies[key];
    ++t.counts[swap ? inverse_spatial(o.relation) : o.relation];
    ++t.support;
  }
  void merge(const SpatialTally& other) {
    for (const auto& [k, t] : other.tallies) tallies[k].merge(t);
  }
};

inline std::map<SpatialKey, LabelDistribution> aggregate_spatial(const std::vector<SpatialObservation>& obs) {
  SpatialTally t;
  for (const auto& o : obs) t.add(o);
  std::map<SpatialKey, LabelDistribution> out;
  for (const auto& [k, tally] : t.tallies) out[k] = LabelDistribution::from_tally(tally);
  return out;
}

// ---------------------------------------------------------------------------
// Spatial file: "scene_type<TAB>subject<TAB>object<TAB>label:prob ...<TAB>support"

inline std::string spatial_to_text(const std::map<SpatialKey, LabelDistribution>& dists) {
  std::string out;
  for (const auto& [key, d] : dists) {
    const auto& [scene, subj, obj] = key;
    out += scene + "\t" + subj + "\t" + obj + "\t" + format_probs(d) + "\t" + std::to_string(d.support) + "\n";
  }
  return out;
}

inline std::map<SpatialKey, LabelDistribution> parse_spatial(const std::vector<std::string>& lines) {
  std::map<SpatialKey, LabelDistribution> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const auto f = text::split(lines[i], '\t');
    check(f.size() == 5, "spatial line " + std::to_string(i + 1) + ": expected 5 tab-separated fields");
    LabelDistribution d;
    d.probs = parse_probs(f[3]);
    d.support = static_cast<std::size_t>(text::parse_int(f[4], "support"));
    out[{f[0], f[1], f[2]}] = std::move(d);
  }
  return out;
}

}  // namespace vispk
