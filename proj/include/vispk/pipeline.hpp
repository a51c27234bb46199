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

// End-to-end run: subtype annotation, then color, size and spatial
// extraction, then typical labels, splits and prompts. Every output file is
// listed in manifest.json with its SHA-256 and the resolved parameter set, so
// two runs over the same inputs can be compared by manifest alone.
//
// Unlike the rest of the library this header links against libcrypto.

#pragma once

#include <openssl/evp.h>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "vispk/color.hpp"
#include "vispk/error.hpp"
#include "vispk/evalkit.hpp"
#include "vispk/labels.hpp"
#include "vispk/parallel.hpp"
#include "vispk/scene.hpp"
#include "vispk/scene_io.hpp"
#include "vispk/size.hpp"
#include "vispk/spatial.hpp"
#include "vispk/subtype.hpp"
#include "vispk/text.hpp"

namespace vispk {

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  check(EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) == 1, "SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

struct GeometryParams {
  int clusters = 5;
  int gamma = 1;
  std::size_t min_support = 5;
  int partitions = 3;
  double overlap = 0.5;
  bool invert_depth = false;
  std::size_t jobs = 1;
};

struct RunConfig {
  // Inputs.
  std::string scenes;
  std::string colors;      // "<image_id>/<instance_id><TAB>text"
  std::string embeddings;
  std::string phrases;     // optional
  std::string kb;          // optional
  bool invert_depth = false;
  // Output.
  std::string out_dir;
  // Parameters.
  int clusters = 5;
  int gamma = 1;
  int partitions = 3;
  double overlap = 0.5;
  std::size_t min_support = 5;
  std::uint64_t seed = 0;
  SplitRatios ratios{};
  std::optional<double> f1_threshold;
  Setting setting = Setting::kFinetune;
  std::size_t jobs = 1;
  std::string log_level = "warn";

  void validate() const {
    namespace fs = std::filesystem;
    auto need = [](const std::string& path, const char* what) {
      check(!path.empty(), std::string("missing input: ") + what);
      check(fs::exists(path), std::string("input not found: ") + path);
    };
    need(scenes, "scenes");
    need(colors, "colors");
    need(embeddings, "embeddings");
    if (!phrases.empty()) need(phrases, "phrases");
    if (!kb.empty()) need(kb, "kb");
    check(!out_dir.empty(), "missing output directory");
    check(clusters >= 1, "--clusters must be >= 1");
    check(gamma == 1 || gamma == 2, "--gamma must be 1 or 2");
    check(partitions >= 1, "--partitions must be >= 1");
    check(overlap > 0.0 && overlap < 1.0, "--overlap must lie in (0, 1)");
    check(min_support >= 1, "--min-support must be >= 1");
    check(jobs >= 1, "--jobs must be >= 1");
    if (f1_threshold) check(*f1_threshold > 0.0 && *f1_threshold <= 1.0, "--f1-threshold must lie in (0, 1]");
  }

  GeometryParams geometry() const {
    return {clusters, gamma, min_support, partitions, overlap, invert_depth, jobs};
  }

  nlohmann::json params_json() const {
    nlohmann::json j;
    j["clusters"] = clusters;
    j["gamma"] = gamma;
    j["partitions"] = partitions;
    j["overlap"] = overlap;
    j["min_support"] = min_support;
    j["seed"] = seed;
    j["ratios"] = {ratios.train, ratios.dev, ratios.test};
    j["f1_threshold"] = f1_threshold ? nlohmann::json(*f1_threshold) : nlohmann::json(nullptr);
    j["setting"] = to_string(setting);
    j["invert_depth"] = invert_depth;
    return j;
  }
};

inline constexpr const char* kPartialMarker = "PARTIAL";
inline constexpr const char* kManifest = "manifest.json";

struct PipelineArtifacts {
  std::vector<Scene> annotated;
  ColorAggregate colors;
  std::vector<RelationRecord> size;
  std::map<SpatialKey, LabelDistribution> spatial;
  std::vector<EvalSample> dataset;
  std::vector<PromptRecord> prompts;
};

// ---------------------------------------------------------------------------
// Stages. The CLI subcommands call these same functions, so running the
// stages one at a time gives the same files as a full run.

// Depth files are a precondition for every scene; fails before any work.
inline std::vector<std::string> depth_paths(const std::string& scene_file, const std::vector<Scene>& scenes) {
  std::vector<std::string> out;
  for (const auto& s : scenes) {
    const std::string p = resolve_depth_path(scene_file, s.depth_ref);
    check(std::filesystem::exists(p), "depth file not found: " + p);
    out.push_back(p);
  }
  return out;
}

inline CandidateMap stage_candidates(const std::vector<Scene>& scenes, const std::vector<std::string>& phrases,
                                     const std::vector<KbEdge>& kb) {
  std::set<std::string> names;
  for (const auto& s : scenes)
    for (const auto& o : s.objects) names.insert(o.name);
  return collect_candidates(phrases, kb, names).candidates;
}

inline std::vector<Scene> stage_annotate(const std::vector<Scene>& scenes, const CandidateMap& cmap,
                                         const EmbeddingTable& emb, std::size_t jobs = 1) {
  return parallel_map(scenes.size(), jobs, [&](std::size_t i) { return annotate_scene(scenes[i], cmap, emb); });
}

// Instance-level color text, "<image_id>/<instance_id><TAB>text".
inline std::vector<std::pair<std::string, std::string>> parse_instance_colors(const std::vector<std::string>& lines) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const auto tab = lines[i].find('\t');
    check(tab != std::string::npos && tab > 0, "colors line " + std::to_string(i + 1) + ": expected ref<TAB>text");
    out.emplace_back(lines[i].substr(0, tab), lines[i].substr(tab + 1));
  }
  return out;
}

// Observations are keyed by the instance's subtype when one was selected.
inline ColorAggregate stage_colors(const std::vector<Scene>& annotated,
                                   const std::vector<std::pair<std::string, std::string>>& instance_colors) {
  std::map<std::string, std::string> key_of;
  for (const auto& s : annotated)
    for (const auto& o : s.objects) key_of[s.image_id + "/" + o.instance_id] = o.key();
  std::vector<ColorObservation> obs;
  for (const auto& [ref, txt] : instance_colors) {
    auto it = key_of.find(ref);
    check(it != key_of.end(), "color text for unknown instance '" + ref + "'");
    obs.push_back({it->second, txt});
  }
  return aggregate_colors(obs);
}


struct GeometryTallies {
  SizeTally size;
  SpatialTally spatial;
};

// One pass over the depth rasters collects both size and spatial events.
inline GeometryTallies stage_geometry(const std::vector<Scene>& scenes, const std::vector<std::string>& depth_files,
                                      const GeometryParams& g, bool want_size = true, bool want_spatial = true) {
  auto per_scene = parallel_map(scenes.size(), g.jobs, [&](std::size_t i) {
    const Scene& s = scenes[i];
    GeometryTallies t;
    const DepthRaster depth = load_depth(depth_files[i], g.invert_depth);
    check_depth_matches(s, depth);
    if (want_size)
      for (const auto& p : scene_size_relations(s, depth, g.clusters, g.gamma)) t.size.add(p);
    if (want_spatial) {
      const auto sp = extract_spatial(s, depth, g.partitions, g.overlap);
      for (const auto& o : sp.intra) t.spatial.add(o);
      for (const auto& o : sp.transitive) t.spatial.add(o);
    }
    return t;
  });
  GeometryTallies out;
  for (const auto& t : per_scene) {
    out.size.merge(t.size);
    out.spatial.merge(t.spatial);
  }
  return out;
}

inline std::vector<RelationRecord> finish_size(const SizeTally& t, std::size_t min_support) {
  return balance_complements(resolve_size(t, min_support));
}

inline std::map<SpatialKey, LabelDistribution> finish_spatial(const SpatialTally& t) {
  std::map<SpatialKey, LabelDistribution> out;
  for (const auto& [k, tally] : t.tallies) out[k] = LabelDistribution::from_tally(tally);
  return out;
}

template <typename K>
std::map<K, TypicalLabelSet> typicalize_all(const std::map<K, LabelDistribution>& dists) {
  std::map<K, TypicalLabelSet> out;
  for (const auto& [k, d] : dists) out[k] = typicalize(d);
  return out;
}

inline SpatialKey parse_spatial_key(const std::string& s) {
  const auto f = text::split(s, '|');
  check(f.size() == 3, "spatial key '" + s + "' must read scene|subject|object");
  return {f[0], f[1], f[2]};
}

// Color, size and spatial samples, each task split on its own.
inline std::vector<EvalSample> stage_dataset(const std::map<std::string, TypicalLabelSet>& color,
                                             const std::vector<RelationRecord>& size,
                                             const std::map<SpatialKey, TypicalLabelSet>& spatial,
                                             const SplitRatios& ratios, std::uint64_t seed) {
  std::vector<EvalSample> out;
  for (auto part : {split_dataset(make_color_samples(color), ratios, seed),
                    split_dataset(make_size_samples(size), ratios, seed),
                    split_dataset(make_spatial_samples(spatial), ratios, seed)}) {
    for (auto& s : part) out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<PromptRecord> stage_prompts(const std::vector<EvalSample>& dataset, Setting setting) {
  std::vector<PromptRecord> out;
  for (Task task : {Task::kColor, Task::kSize, Task::kSpatial}) {
    std::vector<EvalSample> part;
    for (const auto& s : dataset)
      if (s.task == task) part.push_back(s);
    for (auto& p : emit_prompts(task, setting, part)) out.push_back(std::move(p));
  }
  return out;
}

// Runs every stage in memory; no files are written.
inline PipelineArtifacts run_stages(const RunConfig& cfg) {
  PipelineArtifacts art;
  const auto scenes = load_scenes(cfg.scenes);
  const auto depth_files = depth_paths(cfg.scenes, scenes);

  const auto phrases = cfg.phrases.empty() ? std::vector<std::string>{} : text::read_lines(cfg.phrases);
  const auto kb = cfg.kb.empty() ? std::vector<KbEdge>{} : parse_kb_edges(text::read_lines(cfg.kb));
  art.annotated = stage_annotate(scenes, stage_candidates(scenes, phrases, kb), load_embeddings(cfg.embeddings), cfg.jobs);

  art.colors = stage_colors(art.annotated, parse_instance_colors(text::read_lines(cfg.colors)));
  const auto geo = stage_geometry(scenes, depth_files, cfg.geometry());
  art.size = finish_size(geo.size, cfg.min_support);
  art.spatial = finish_spatial(geo.spatial);

  art.dataset = stage_dataset(typicalize_all(art.colors.distributions), art.size, typicalize_all(art.spatial),
                              cfg.ratios, cfg.seed);
  art.prompts = stage_prompts(art.dataset, cfg.setting);
  return art;
}

struct PipelineResult {
  std::string manifest_path;
  std::vector<std::string> files;
};

// Writes the six artifacts and the manifest. On failure a PARTIAL marker
// holding the error message is left in the output directory and the error
// is rethrown.
inline PipelineResult run_pipeline(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  const fs::path out(cfg.out_dir);
  fs::remove(out / kPartialMarker);
  try {
    const auto art = run_stages(cfg);
    const std::vector<std::pair<std::string, std::string>> files = {
        {"scenes.annotated.jsonl", scenes_to_text(art.annotated)},
        {"color.tsv", distributions_to_text(art.colors.distributions)},
        {"size.tsv", relations_to_text(art.size)},
        {"spatial.tsv", spatial_to_text(art.spatial)},
        {"dataset.tsv", dataset_to_text(art.dataset)},
        {"prompts.tsv", prompts_to_text(art.prompts)},
    };
    nlohmann::json manifest;
    manifest["params"] = cfg.params_json();
    manifest["inputs"] = nlohmann::json::object();
    for (const auto& [role, path] : std::vector<std::pair<std::string, std::string>>{
             {"scenes", cfg.scenes}, {"colors", cfg.colors}, {"embeddings", cfg.embeddings},
             {"phrases", cfg.phrases}, {"kb", cfg.kb}}) {
      if (path.empty()) continue;
      manifest["inputs"][role] = {{"path", path}, {"sha256", sha256_hex(text::read_file(path))}};
    }
    manifest["files"] = nlohmann::json::array();
    PipelineResult result;
    for (const auto& [name, content] : files) {
      text::write_file((out / name).string(), content);
      manifest["files"].push_back({{"path", name}, {"bytes", content.size()}, {"sha256", sha256_hex(content)}});
      result.files.push_back((out / name).string());
    }
    result.manifest_path = (out / kManifest).string();
    text::write_file(result.manifest_path, manifest.dump(2) + "\n");
    return result;
  } catch (const std::exception& e) {
    text::write_file((out / kPartialMarker).string(), std::string(e.what()) + "\n");
    throw;
  }
}

}  // namespace vispk
