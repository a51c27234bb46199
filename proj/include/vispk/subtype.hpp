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

// Subtype collection and selection.
//
// Candidates for an object name come from two places: noun phrases whose
// trailing tokens equal the name ("kitchen sink" for "sink"), and "is-a"
// edges from a knowledge base. Selection is two-stage. The image embedding
// first filters out candidates that fit the picture worse than the bare name
// does (the name is the anchor and always survives), then the region
// embedding picks the closest survivor.

#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vispk/error.hpp"
#include "vispk/scene.hpp"
#include "vispk/text.hpp"

namespace vispk {

using CandidateMap = std::map<std::string, std::set<std::string>>;

struct KbEdge {
  std::string child;
  std::string parent;
};

struct CandidateCollection {
  CandidateMap candidates;
  std::size_t skipped_phrases = 0;
};

namespace detail {

// Single-space tokenisation; returns false for phrases that are empty or
// carry stray whitespace.
inline bool tokenize_phrase(std::string_view phrase, std::vector<std::string>& tokens) {
  tokens.clear();
  if (phrase.empty()) return false;
  for (char c : phrase)
    if (c != ' ' && std::isspace(static_cast<unsigned char>(c))) return false;
  tokens = text::split(phrase, ' ');
  for (const auto& t : tokens)
    if (t.empty()) return false;
  return true;
}

}  // namespace detail

inline CandidateCollection collect_candidates(const std::vector<std::string>& noun_phrases,
                                              const std::vector<KbEdge>& kb,
                                              const std::set<std::string>& object_names) {
  CandidateCollection out;
  for (const auto& n : object_names) out.candidates[n];

  std::vector<std::string> tokens;
  for (const auto& raw : noun_phrases) {
    const std::string phrase = text::lower(raw);
    if (!detail::tokenize_phrase(phrase, tokens)) {
      ++out.skipped_phrases;
      continue;
    }
    // Every proper token suffix is a potential object name.
    for (std::size_t start = 1; start < tokens.size(); ++start) {
      std::vector<std::string> tail(tokens.begin() + static_cast<std::ptrdiff_t>(start), tokens.end());
      const std::string suffix = text::join(tail, " ");
      if (object_names.count(suffix)) out.candidates[suffix].insert(phrase);
    }
  }
  for (const KbEdge& e : kb) {
    const std::string child = text::lower(e.child), parent = text::lower(e.parent);
    if (child.empty() || child == parent || !object_names.count(parent)) continue;
    out.candidates[parent].insert(child);
  }
  return out;
}

// First stage: keep candidates strictly closer to the image than the anchor.
inline std::set<std::string> filter_candidates(const std::string& object_name,
                                               const std::set<std::string>& candidates,
                                               const EmbeddingTable& emb,
                                               const std::string& image_key) {
  std::set<std::string> kept{object_name};
  if (candidates.empty()) return kept;
  const auto& image = emb.get(image_key);
  const double anchor = cosine(emb.get(EmbeddingTable::text_key(object_name)), image);
  for (const auto& c : candidates) {
    if (cosine(emb.get(EmbeddingTable::text_key(c)), image) > anchor) kept.insert(c);
  }
  return kept;
}

// Second stage: argmax of region/text cosine; ties go to the
// lexicographically smallest candidate.
inline std::string select_subtype(const std::set<std::string>& filtered, const EmbeddingTable& emb,
                                  const std::string& region_key) {
  check(!filtered.empty(), "select_subtype on an empty candidate set");
  const auto& region = emb.get(region_key);
  const std::string* best = nullptr;
  double best_sim = 0.0;
  for (const auto& c : filtered) {  // std::set iterates in lexicographic order
    const double sim = cosine(region, emb.get(EmbeddingTable::text_key(c)));
    if (best == nullptr || sim > best_sim) {
      best = &c;
      best_sim = sim;
    }
  }
  return *best;
}

inline Scene annotate_scene(const Scene& scene, const CandidateMap& cmap, const EmbeddingTable& emb) {
  Scene out = scene;
  for (ObjectInstance& o : out.objects) {
    auto it = cmap.find(o.name);
    if (it == cmap.end() || it->second.empty()) {
      o.subtype = o.name;
      continue;
    }
    const auto filtered =
        filter_candidates(o.name, it->second, emb, EmbeddingTable::image_key(scene.image_id));
    o.subtype = select_subtype(filtered, emb, EmbeddingTable::region_key(scene.image_id, o.instance_id));
  }
  return out;
}

// ---------------------------------------------------------------------------
// File formats

// "child<TAB>parent" per line.
inline std::vector<KbEdge> parse_kb_edges(const std::vector<std::string>& lines) {
  std::vector<KbEdge> edges;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const auto fields = text::split(lines[i], '\t');
    check(fields.size() == 2, "kb line " + std::to_string(i + 1) + ": expected child<TAB>parent");
    const std::string child = text::lower(text::trim(fields[0]));
    const std::string parent = text::lower(text::trim(fields[1]));
    check(!child.empty() && !parent.empty(), "kb line " + std::to_string(i + 1) + ": empty field");
    edges.push_back({child, parent});
  }
  return edges;
}

// "name<TAB>cand1,cand2,..." per line; names with no candidates keep an
// empty second field.
inline std::string candidates_to_text(const CandidateMap& cmap) {
  std::string out;
  for (const auto& [name, cands] : cmap) {
    out += name;
    out += '\t';
    out += text::join(std::vector<std::string>(cands.begin(), cands.end()), ",");
    out += '\n';
  }
  return out;
}

inline CandidateMap parse_candidates(const std::vector<std::string>& lines) {
  CandidateMap cmap;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const auto fields = text::split(lines[i], '\t');
    check(fields.size() == 2, "candidate line " + std::to_string(i + 1) + ": expected name<TAB>candidates");
    auto& set = cmap[fields[0]];
    if (!fields[1].empty())
      for (const auto& c : text::split(fields[1], ',')) set.insert(c);
  }
  return cmap;
}

}  // namespace vispk
