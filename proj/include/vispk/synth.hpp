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

// Synthetic 3D scenes with known ground truth.
//
// Flat, camera-facing rectangles are placed in front of a horizontal pinhole
// camera (world elevation 0 is the optical axis) and projected to boxes:
//
//   box width  = f * true_width / depth     (likewise height)
//   centre x   = W / 2 + f * x / depth
//   centre y   = H / 2 - f * elevation / depth
//
// Boxes never overlap, so every object is fully visible and the depth raster
// (nearest covering object per pixel centre, background = max depth + 1)
// is exact inside each box.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vispk/color.hpp"
#include "vispk/error.hpp"
#include "vispk/scene.hpp"
#include "vispk/scene_io.hpp"
#include "vispk/size.hpp"
#include "vispk/spatial.hpp"
#include "vispk/subtype.hpp"
#include "vispk/text.hpp"

namespace vispk::synth {

struct Camera {
  double focal = 500.0;
  int width = 1024;
  int height = 768;
  // World elevation of the camera above the floor.
  double eye_height = 1.4;
};

struct SceneConfig {
  double depth_min = 8.0;
  double depth_max = 12.0;
  // Horizontal placement range in world units, either side of the axis.
  double x_range = 8.0;
  int max_retries = 2000;
};

// One catalogue entry. Objects rest on discrete support levels (floor 0,
// table 0.8, shelf 1.6, high 2.4) and are at most 0.5 tall, so two objects are
// level with each other exactly when they share a support. Frontal areas span
// 0.01 to 1.56 and any two names differ by more than the oracle's 5% tolerance.
struct ObjectKind {
  std::string name;
  double width;
  double height;
  // Candidate heights of the object's bottom edge above the floor.
  std::vector<double> bottoms;
  std::vector<std::string> color_terms;
  std::vector<std::string> subtypes;
};

inline const std::vector<ObjectKind>& catalogue() {
  static const std::vector<ObjectKind> kinds = {
      {"cup", 0.08, 0.125, {0.8, 1.6}, {"white", "teal"}, {}},
      {"book", 0.125, 0.1, {0.8, 1.6, 2.4}, {"maroon", "blue"}, {}},
      {"lamp", 0.2, 0.25, {0.8, 1.6}, {"golden", "white"}, {"desk lamp"}},
      {"laptop", 0.25, 0.25, {0.8}, {"silver", "black"}, {}},
      {"chair", 0.625, 0.4, {0.0}, {"wooden", "black"}, {"office chair"}},
      {"sink", 0.78125, 0.4, {0.8}, {"white", "steel"}, {"kitchen sink", "bathroom sink"}},
      {"table", 2.5, 0.5, {0.0}, {"wooden", "brown"}, {"coffee table"}},
      {"shelf", 3.125, 0.5, {1.6, 2.4}, {"wooden", "beige"}, {}},
      {"clock", 0.3, 0.3, {2.4}, {"gold", "white"}, {}},
      {"rug", 2.0, 0.05, {0.0}, {"peach", "red"}, {}},
  };
  return kinds;
}

inline const ObjectKind& kind_of(const std::string& name) {
  for (const auto& k : catalogue())
    if (k.name == name) return k;
  fail("unknown synthetic object '" + name + "'");
}

struct SynthObject {
  std::string instance_id;
  std::string name;
  double true_width = 0.0;
  double true_height = 0.0;
  double x = 0.0;
  double elevation = 0.0;  // centre height relative to the optical axis
  double depth = 0.0;
  std::string subtype;
  std::string color_term;

  double area() const { return true_width * true_height; }
  double bottom() const { return elevation - true_height / 2.0; }
};

struct GroundTruth {
  SceneType scene_type = SceneType::kBedroom;
  Camera camera;
  std::vector<SynthObject> objects;
  // Canonical basic colors per object name.
  std::map<std::string, std::set<std::string>> colors;
};

struct SynthScene {
  Scene scene;
  DepthRaster depth;
  GroundTruth truth;
};

namespace detail {

// Portable uniform draws; std distributions differ between standard libraries.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }
inline std::size_t index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

inline Box project(const SynthObject& o, const Camera& cam) {
  const double w = cam.focal * o.true_width / o.depth;
  const double h = cam.focal * o.true_height / o.depth;
  const double cx = cam.width / 2.0 + cam.focal * o.x / o.depth;
  const double cy = cam.height / 2.0 - cam.focal * o.elevation / o.depth;
  return {cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0};
}

inline bool overlaps(const Box& a, const Box& b) {
  return a.x_min < b.x_max && b.x_min < a.x_max && a.y_min < b.y_max && b.y_min < a.y_max;
}

// The subtype that fits the scene type, when the kind has one.
inline std::string contextual_subtype(const ObjectKind& k, SceneType t) {
  if (k.subtypes.empty()) return k.name;
  if (k.name == "sink") return t == SceneType::kKitchen ? "kitchen sink" : "bathroom sink";
  if (k.name == "chair") return t == SceneType::kOffice ? "office chair" : k.name;
  if (k.name == "lamp") return t == SceneType::kOffice || t == SceneType::kBedroom ? "desk lamp" : k.name;
  if (k.name == "table") return t == SceneType::kLivingRoom ? "coffee table" : k.name;
  return k.name;
}

}  // namespace detail

inline SynthScene generate_scene(std::uint64_t seed, int n_objects, SceneType scene_type, const Camera& cam = {},
                                 const SceneConfig& cfg = {}) {
  check(n_objects >= 2, "a synthetic scene needs at least 2 objects");
  check(cam.focal > 0.0, "focal length must be positive");
  check(cam.width > 0 && cam.height > 0, "image dimensions must be positive");
  check(cfg.depth_min > 0.0 && cfg.depth_min < cfg.depth_max, "invalid depth range");

  std::mt19937_64 rng(seed);
  const auto& kinds = catalogue();

  // Distinct names while the catalogue lasts.
  std::vector<std::size_t> pool(kinds.size());
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[detail::index(rng, i)]);

  SynthScene out;
  out.truth.scene_type = scene_type;
  out.truth.camera = cam;
  std::vector<Box> boxes;
  for (int i = 0; i < n_objects; ++i) {
    const ObjectKind& k = kinds[static_cast<std::size_t>(i) < pool.size() ? pool[static_cast<std::size_t>(i)]
                                                                         : detail::index(rng, kinds.size())];
    bool placed = false;
    for (int attempt = 0; attempt < cfg.max_retries && !placed; ++attempt) {
      SynthObject o;
      o.instance_id = std::to_string(i + 1);
      o.name = k.name;
      o.true_width = k.width;
      o.true_height = k.height;
      o.depth = detail::uniform(rng, cfg.depth_min, cfg.depth_max);
      o.x = detail::uniform(rng, -cfg.x_range, cfg.x_range);
      const double bottom = k.bottoms[detail::index(rng, k.bottoms.size())];
      o.elevation = bottom + k.height / 2.0 - cam.eye_height;
      const Box b = detail::project(o, cam);
      if (b.x_min < 0.0 || b.y_min < 0.0 || b.x_max > cam.width || b.y_max > cam.height) continue;
      if (std::any_of(boxes.begin(), boxes.end(), [&](const Box& other) { return detail::overlaps(b, other); }))
        continue;
      o.subtype = detail::contextual_subtype(k, scene_type);
      o.color_term = k.color_terms[detail::index(rng, k.color_terms.size())];
      boxes.push_back(b);
      out.truth.objects.push_back(std::move(o));
      placed = true;
    }
    check(placed, "could not place object " + std::to_string(i + 1) + " of synthetic scene " + std::to_string(seed) +
                      " inside the frame");
  }

  Scene& s = out.scene;
  s.image_id = "synth-" + std::to_string(seed);
  s.width = cam.width;
  s.height = cam.height;
  s.scene_type = scene_type;
  s.depth_ref = "depth/" + s.image_id + ".dr";
  double max_depth = 0.0;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& o = out.truth.objects[i];
    s.objects.push_back({o.instance_id, o.name, std::nullopt,
                         Region::box(boxes[i].x_min, boxes[i].y_min, boxes[i].x_max, boxes[i].y_max)});
    max_depth = std::max(max_depth, o.depth);
  }

  std::vector<double> raster(static_cast<std::size_t>(cam.width) * static_cast<std::size_t>(cam.height),
                             max_depth + 1.0);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const Box& b = boxes[i];
    const double d = out.truth.objects[i].depth;
    const int c0 = std::max(0, static_cast<int>(std::floor(b.x_min - 0.5)));
    const int c1 = std::min(cam.width - 1, static_cast<int>(std::ceil(b.x_max - 0.5)));
    const int r0 = std::max(0, static_cast<int>(std::floor(b.y_min - 0.5)));
    const int r1 = std::min(cam.height - 1, static_cast<int>(std::ceil(b.y_max - 0.5)));
    for (int row = r0; row <= r1; ++row) {
      const double cy = row + 0.5;
      if (cy < b.y_min || cy > b.y_max) continue;
      for (int col = c0; col <= c1; ++col) {
        const double cx = col + 0.5;
        if (cx < b.x_min || cx > b.x_max) continue;
        double& px = raster[static_cast<std::size_t>(row) * static_cast<std::size_t>(cam.width) +
                            static_cast<std::size_t>(col)];
        px = std::min(px, d);
      }
    }
  }
  out.depth = DepthRaster(cam.width, cam.height, std::move(raster));

  for (const auto& o : out.truth.objects) {
    auto& set = out.truth.colors[o.name];
    for (const auto& term : kind_of(o.name).color_terms)
      for (const auto& c : canonicalize_color(term).colors) set.insert(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Oracle relations from world coordinates

struct OracleParams {
  double margin = 0.1;    // m, world units
  double epsilon = 0.05;  // relative area tolerance
};

struct SpatialTruth {
  std::string subject_instance;
  std::string object_instance;
  std::string subject;
  std::string object;
  std::string relation;
  // False when a deciding gap lies within the margin, i.e. the truth is
  // ambiguous and should not be scored.
  bool clear = true;
  // Same test on the projected geometry, with the margin projected at the
  // farther of the two depths.
  bool clear_in_image = true;
};

struct OracleRelations {
  SceneType scene_type = SceneType::kBedroom;
  std::vector<SizePair> size;
  std::vector<SpatialTruth> spatial;
};

// Size: a smaller b iff area(a) < area(b) * (1 - epsilon).
// Spatial: the lowest-point/centroid rule on world elevations; a is above b
// when a's bottom exceeds b's centre by more than the margin.
inline OracleRelations oracle_relations(const GroundTruth& truth, const OracleParams& params = {}) {
  OracleRelations out;
  out.scene_type = truth.scene_type;
  const auto& objs = truth.objects;
  for (std::size_t i = 0; i < objs.size(); ++i) {
    for (std::size_t j = i + 1; j < objs.size(); ++j) {
      const auto& a = objs[i];
      const auto& b = objs[j];
      if (a.name == b.name) continue;
      if (a.area() < b.area() * (1.0 - params.epsilon)) out.size.push_back({a.name, b.name});
      else if (b.area() < a.area() * (1.0 - params.epsilon)) out.size.push_back({b.name, a.name});

      const double gap_ab = a.bottom() - b.elevation;
      const double gap_ba = b.bottom() - a.elevation;
      SpatialTruth t{a.instance_id, b.instance_id, a.name, b.name, kSimilar, true};
      if (gap_ab > params.margin) t.relation = kAbove;
      else if (gap_ba > params.margin) t.relation = kBelow;
      t.clear = std::abs(gap_ab) > params.margin && std::abs(gap_ba) > params.margin;
      // Image y grows downward: a's lowest point sits above b's centre when
      // its y is smaller.
      const Camera& cam = truth.camera;
      const Box pa = detail::project(a, cam), pb = detail::project(b, cam);
      const double img_ab = (pb.y_min + pb.y_max) / 2.0 - pa.y_max;
      const double img_ba = (pa.y_min + pa.y_max) / 2.0 - pb.y_max;
      const double img_margin = cam.focal * params.margin / std::max(a.depth, b.depth);
      t.clear_in_image = std::abs(img_ab) > img_margin && std::abs(img_ba) > img_margin;
      out.spatial.push_back(std::move(t));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corpus writer: the exact file set the pipeline consumes.
//
//   scenes.jsonl           scene line-records
//   depth/<image_id>.dr    depth rasters
//   colors.tsv             "<image_id>/<instance_id><TAB><color text>"
//   embeddings.tsv         image, region and text vectors
//   phrases.txt            noun phrases, one per line
//   kb.tsv                 is-a edges
//   truth.tsv              oracle relations for inspection

namespace detail {

inline std::vector<double> unit(std::vector<double> v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  for (double& x : v) x /= n;
  return v;
}

inline std::vector<double> random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::vector<double> v(dim);
  for (double& x : v) x = uniform(rng, -1.0, 1.0);
  return unit(std::move(v));
}

inline std::vector<double> mix(const std::vector<double>& a, const std::vector<double>& b, double wb) {
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i] + wb * b[i];
  return unit(std::move(v));
}

}  // namespace detail

struct CorpusConfig {
  std::uint64_t seed = 1;
  int scenes = 10;
  int objects_per_scene = 8;
  Camera camera{};
  SceneConfig scene{};
};

inline std::vector<SynthScene> generate_corpus(const CorpusConfig& cfg) {
  check(cfg.scenes >= 1, "corpus needs at least one scene");
  std::vector<SynthScene> out;
  for (int i = 0; i < cfg.scenes; ++i) {
    const std::uint64_t seed = cfg.seed * 1000003ULL + static_cast<std::uint64_t>(i);
    const SceneType t = kAllSceneTypes[static_cast<std::size_t>(i) % kAllSceneTypes.size()];
    out.push_back(generate_scene(seed, cfg.objects_per_scene, t, cfg.camera, cfg.scene));
  }
  return out;
}

// Text, image and region vectors for the catalogue. Scene types own a
// direction; contextual subtypes lean towards their scene's direction and
// region vectors towards the instance's true subtype.
inline EmbeddingTable corpus_embeddings(const std::vector<SynthScene>& scenes, std::uint64_t seed) {
  constexpr std::size_t kDim = 16;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  EmbeddingTable emb;
  std::map<SceneType, std::vector<double>> scene_dir;
  for (SceneType t : kAllSceneTypes) scene_dir[t] = detail::random_unit(rng, kDim);

  std::map<std::string, std::vector<double>> text;
  for (const auto& k : catalogue()) {
    text[k.name] = detail::random_unit(rng, kDim);
    for (const auto& s : k.subtypes) {
      SceneType home = SceneType::kOffice;
      if (s == "kitchen sink") home = SceneType::kKitchen;
      else if (s == "bathroom sink") home = SceneType::kBathroom;
      else if (s == "coffee table") home = SceneType::kLivingRoom;
      text[s] = detail::mix(text[k.name], scene_dir[home], 1.0);
    }
  }
  for (const auto& [t, v] : text) emb.add(EmbeddingTable::text_key(t), v);

  for (const auto& sc : scenes) {
    const auto& s = sc.scene;
    emb.add(EmbeddingTable::image_key(s.image_id),
            detail::mix(scene_dir.at(*s.scene_type), detail::random_unit(rng, kDim), 0.2));
    for (const auto& o : sc.truth.objects) {
      emb.add(EmbeddingTable::region_key(s.image_id, o.instance_id),
              detail::mix(text.at(o.subtype), detail::random_unit(rng, kDim), 0.1));
    }
  }
  return emb;
}

inline void write_corpus(const std::string& dir, const CorpusConfig& cfg) {
  namespace fs = std::filesystem;
  const auto scenes = generate_corpus(cfg);
  fs::create_directories(fs::path(dir) / "depth");

  std::vector<Scene> records;
  std::string colors, truth;
  for (const auto& sc : scenes) {
    records.push_back(sc.scene);
    text::write_file((fs::path(dir) / sc.scene.depth_ref).string(), depth_to_text(sc.depth));
    for (const auto& o : sc.truth.objects) colors += sc.scene.image_id + "/" + o.instance_id + "\t" + o.color_term + "\n";
    const auto oracle = oracle_relations(sc.truth);
    for (const auto& p : oracle.size) truth += sc.scene.image_id + "\tsize\t" + p.smaller + "\tsmaller\t" + p.larger + "\n";
    for (const auto& t : oracle.spatial)
      truth += sc.scene.image_id + "\tspatial\t" + t.subject + "\t" + t.relation + "\t" + t.object +
               (t.clear ? "" : "\tambiguous") + "\n";
  }
  save_scenes((fs::path(dir) / "scenes.jsonl").string(), records);
  text::write_file((fs::path(dir) / "colors.tsv").string(), colors);
  text::write_file((fs::path(dir) / "embeddings.tsv").string(), embeddings_to_text(corpus_embeddings(scenes, cfg.seed)));
  text::write_file((fs::path(dir) / "truth.tsv").string(), truth);

  std::string phrases, kb;
  for (const auto& k : catalogue()) {
    phrases += k.name + "\n";
    for (const auto& s : k.subtypes) {
      if (text::ends_with(s, " " + k.name) && s != "office chair") phrases += s + "\n";
    }
  }
  kb += "office chair\tchair\n";
  kb += "desk lamp\tlamp\n";
  text::write_file((fs::path(dir) / "phrases.txt").string(), phrases);
  text::write_file((fs::path(dir) / "kb.tsv").string(), kb);
}

}  // namespace vispk::synth
