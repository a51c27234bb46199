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

#include "test_util.hpp"
#include "vispk/synth.hpp"

namespace vispk::synth {
namespace {

SynthObject make(std::string id, double width, double height, double x, double bottom, double depth,
                 const Camera& cam = {}) {
  SynthObject o;
  o.instance_id = id;
  o.name = "obj" + id;
  o.true_width = width;
  o.true_height = height;
  o.x = x;
  o.elevation = bottom + height / 2.0 - cam.eye_height;
  o.depth = depth;
  return o;
}

// Boxes and a depth raster for hand-placed objects, painted the same way the
// generator does it (pixel centres inside the box, nearest depth wins).
std::pair<Scene, DepthRaster> render(const std::vector<SynthObject>& objs, const Camera& cam = {}) {
  Scene s{"fixture", cam.width, cam.height, SceneType::kKitchen, {}, "fixture.dr"};
  double far = 0.0;
  for (const auto& o : objs) far = std::max(far, o.depth);
  std::vector<double> px(static_cast<std::size_t>(cam.width * cam.height), far + 1.0);
  for (const auto& o : objs) {
    const Box b = detail::project(o, cam);
    s.objects.push_back({o.instance_id, o.name, std::nullopt, Region::box(b.x_min, b.y_min, b.x_max, b.y_max)});
    for (int r = 0; r < cam.height; ++r)
      for (int c = 0; c < cam.width; ++c) {
        const double cx = c + 0.5, cy = r + 0.5;
        if (cx >= b.x_min && cx <= b.x_max && cy >= b.y_min && cy <= b.y_max) {
          double& d = px[static_cast<std::size_t>(r * cam.width + c)];
          d = std::min(d, o.depth);
        }
      }
  }
  return {s, DepthRaster(cam.width, cam.height, std::move(px))};
}

TEST(Project, PinholeWidth) {
  const Camera cam;
  for (double d : {8.0, 9.5, 12.0}) {
    const Box b = detail::project(make("1", 0.6, 0.4, 0.0, 1.0, d), cam);
    EXPECT_NEAR(b.x_max - b.x_min, cam.focal * 0.6 / d, 1.0);
    EXPECT_NEAR(b.y_max - b.y_min, cam.focal * 0.4 / d, 1.0);
  }
}

TEST(Project, InverseSquareArea) {
  const Box near = detail::project(make("1", 0.5, 0.5, 0.0, 1.0, 4.0), {});
  const Box far = detail::project(make("2", 0.5, 0.5, 0.0, 1.0, 8.0), {});
  auto area = [](const Box& b) { return (b.x_max - b.x_min) * (b.y_max - b.y_min); };
  EXPECT_NEAR(area(near) / area(far), 4.0, 1e-9);
}

TEST(Project, VerticalPosition) {
  const Camera cam;
  const auto o = make("1", 0.2, 0.2, 0.0, 2.0, 10.0);
  const Box b = detail::project(o, cam);
  EXPECT_NEAR((b.y_min + b.y_max) / 2.0, cam.height / 2.0 - cam.focal * o.elevation / o.depth, 1e-9);
}

TEST(Generate, GeneratedBoxesMatchTruth) {
  const auto sc = generate_scene(42, 8, SceneType::kOffice);
  ASSERT_EQ(sc.scene.objects.size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) {
    const auto& o = sc.truth.objects[i];
    const Box b = sc.scene.objects[i].region.bounds();
    EXPECT_NEAR(b.x_max - b.x_min, 500.0 * o.true_width / o.depth, 1.0);
    EXPECT_GE(b.x_min, 0.0);
    EXPECT_LE(b.y_max, 768.0);
    // The raster reports the object's own depth inside its box.
    EXPECT_NEAR(region_mean_depth(sc.scene.objects[i].region, sc.depth), o.depth, 1e-9);
  }
}

TEST(Generate, ByteDeterministic) {
  const auto a = generate_scene(7, 8, SceneType::kKitchen);
  const auto b = generate_scene(7, 8, SceneType::kKitchen);
  EXPECT_EQ(scene_to_line(a.scene), scene_to_line(b.scene));
  EXPECT_EQ(depth_to_text(a.depth), depth_to_text(b.depth));
  EXPECT_NE(scene_to_line(a.scene), scene_to_line(generate_scene(8, 8, SceneType::kKitchen).scene));
}

TEST(Generate, Errors) {
  EXPECT_THROW(generate_scene(1, 1, SceneType::kKitchen), Error);
  Camera bad;
  bad.focal = 0.0;
  EXPECT_THROW(generate_scene(1, 3, SceneType::kKitchen, bad), Error);
  // Nothing fits in a 4x4 frame.
  Camera tiny;
  tiny.width = tiny.height = 4;
  SceneConfig few;
  few.max_retries = 20;
  EXPECT_THROW(generate_scene(1, 3, SceneType::kKitchen, tiny, few), Error);
}

TEST(Oracle, Examples) {
  GroundTruth g;
  g.objects = {make("1", 1.0, 1.0, -3, 0.0, 9.0), make("2", 10.0, 1.0, 3, 0.0, 9.0)};
  auto r = oracle_relations(g);
  ASSERT_EQ(r.size.size(), 1u);
  EXPECT_EQ(r.size[0].smaller, "obj1");
  ASSERT_EQ(r.spatial.size(), 1u);
  EXPECT_EQ(r.spatial[0].relation, kSimilar);  // elevation gap 0

  g.objects[1] = make("2", 1.0, 0.2, 3, 0.8, 9.0);
  r = oracle_relations(g);
  EXPECT_EQ(r.spatial[0].relation, kBelow);
  EXPECT_TRUE(r.spatial[0].clear);
}

TEST(Oracle, RandomTruthTable) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    GroundTruth g;
    for (int i = 0; i < 6; ++i)
      g.objects.push_back(make(std::to_string(i + 1), 0.1 + u(rng), 0.1 + u(rng), -4 + i, 2.0 * u(rng), 8 + 4 * u(rng)));
    const auto r = oracle_relations(g);
    std::size_t k = 0, ks = 0;
    for (int i = 0; i < 6; ++i)
      for (int j = i + 1; j < 6; ++j) {
        const auto& a = g.objects[i];
        const auto& b = g.objects[j];
        const double aa = a.true_width * a.true_height, ab = b.true_width * b.true_height;
        if (aa < 0.95 * ab || ab < 0.95 * aa) {
          ASSERT_LT(ks, r.size.size());
          EXPECT_EQ(r.size[ks].smaller, aa < ab ? a.name : b.name);
          ++ks;
        }
        const double abot = a.elevation - a.true_height / 2, bbot = b.elevation - b.true_height / 2;
        const std::string expect = abot - b.elevation > 0.1 ? kAbove : bbot - a.elevation > 0.1 ? kBelow : kSimilar;
        ASSERT_LT(k, r.spatial.size());
        EXPECT_EQ(r.spatial[k].relation, expect);
        ++k;
      }
    EXPECT_EQ(k, r.spatial.size());
    EXPECT_EQ(ks, r.size.size());
  }
}

// A near object seen low in the frame against a far one that projects
// higher: comparing every pair directly gets the direction wrong, while the
// depth-partitioned extractor only compares nearby objects and reaches the
// far pair through the bridges.
TEST(DepthDistortion, PartitionedExtractorSurvivesAdversarialScene) {
  const std::vector<SynthObject> objs = {
      make("1", 0.3, 0.5, -6.0, 0.7, 11.8),
      make("2", 0.3, 0.4, -3.0, 0.05, 8.4),
      make("3", 0.3, 0.6, 0.0, 1.0, 2.5),
      make("4", 0.3, 0.6, 3.0, 1.0, 7.0),
  };
  GroundTruth g;
  g.scene_type = SceneType::kKitchen;
  g.objects = objs;
  const auto truth = oracle_relations(g);
  const auto [scene, depth] = render(objs);

  std::map<std::pair<std::string, std::string>, std::string> partitioned;
  const auto ex = extract_spatial(scene, depth);
  for (const auto* list : {&ex.intra, &ex.transitive})
    for (const auto& o : *list) partitioned[{o.subject_instance, o.object_instance}] = o.relation;

  int naive_wrong = 0, recovered = 0;
  for (const auto& t : truth.spatial) {
    const auto it = partitioned.find({t.subject_instance, t.object_instance});
    if (it != partitioned.end()) {
      EXPECT_TRUE(t.clear) << t.subject << " " << t.object;
      EXPECT_EQ(it->second, t.relation) << t.subject << " " << t.object;
    }
    if (!t.clear) continue;
    const auto& a = scene.objects[std::stoul(t.subject_instance) - 1];
    const auto& b = scene.objects[std::stoul(t.object_instance) - 1];
    if (elevation_relation(a, b) != t.relation) {
      ++naive_wrong;
      if (it != partitioned.end() && it->second == t.relation) ++recovered;
    }
  }
  EXPECT_GE(naive_wrong, 1);
  EXPECT_GE(recovered, 1);
}

TEST(Corpus, WritesEveryInput) {
  testing::TempDir dir("synth");
  CorpusConfig cfg;
  cfg.scenes = 3;
  write_corpus(dir.path().string(), cfg);
  for (const char* f : {"scenes.jsonl", "colors.tsv", "embeddings.tsv", "phrases.txt", "kb.tsv", "truth.tsv"})
    EXPECT_TRUE(std::filesystem::exists(dir.file(f))) << f;
  const auto scenes = load_scenes(dir.file("scenes.jsonl"));
  ASSERT_EQ(scenes.size(), 3u);
  for (const auto& s : scenes) EXPECT_TRUE(std::filesystem::exists(dir.file(s.depth_ref)));
}

}  // namespace
}  // namespace vispk::synth
