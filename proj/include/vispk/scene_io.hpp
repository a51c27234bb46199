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

// Readers and writers for scene line-records, depth rasters and embedding
// tables.
//
// Scene line-record (one JSON object per line, UTF-8, LF):
//   {"depth_ref":"depth/img1.dr","height":480,"image_id":"img1",
//    "objects":[{"instance_id":"1","name":"sink",
//                "region":{"coords":[10.0,20.0,50.0,60.0],"kind":"box"}}],
//    "scene_type":"kitchen","width":640}
// Polygon coords are a list of [x, y] pairs. "subtype" is written only when
// set. The canonical form is exactly what scene_to_line() produces.
//
// Depth raster: header "DR1 <width> <height>" then width*height values.
// Embedding table: "<key>\t<v1> <v2> ... <vd>" per line.

#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "vispk/error.hpp"
#include "vispk/scene.hpp"
#include "vispk/text.hpp"

namespace vispk {

namespace detail {

inline Region region_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const auto& coords = j.at("coords");
  if (kind == "box") {
    check(coords.is_array() && coords.size() == 4, "box needs 4 coordinates");
    return Region::box(coords[0].get<double>(), coords[1].get<double>(), coords[2].get<double>(),
                       coords[3].get<double>());
  }
  if (kind == "polygon") {
    check(coords.is_array(), "polygon coords must be an array");
    std::vector<Point> pts;
    for (const auto& p : coords) {
      check(p.is_array() && p.size() == 2, "polygon vertex must be [x, y]");
      pts.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    return Region::polygon(std::move(pts));
  }
  fail("unknown region kind '" + kind + "'");
}

inline nlohmann::json region_to_json(const Region& r) {
  nlohmann::json j;
  if (r.is_box()) {
    const Box& b = r.as_box();
    j["kind"] = "box";
    j["coords"] = {b.x_min, b.y_min, b.x_max, b.y_max};
  } else {
    j["kind"] = "polygon";
    nlohmann::json pts = nlohmann::json::array();
    for (const Point& p : r.as_polygon()) pts.push_back({p.x, p.y});
    j["coords"] = pts;
  }
  return j;
}

}  // namespace detail

// Checks the invariants a Scene must satisfy regardless of how it was built.
inline void validate_scene(const Scene& s) {
  check(!s.image_id.empty(), "empty image_id");
  check(s.width > 0 && s.height > 0, "image dimensions must be positive");
  std::set<std::string> ids;
  for (const ObjectInstance& o : s.objects) {
    check(!o.instance_id.empty(), "empty instance_id");
    check(ids.insert(o.instance_id).second, "duplicate instance_id '" + o.instance_id + "'");
    check(!o.name.empty(), "empty object name");
    check(o.name == text::lower(o.name), "object name must be lowercase: '" + o.name + "'");
    if (o.subtype) {
      check(*o.subtype == o.name || text::ends_with(*o.subtype, " " + o.name),
            "subtype '" + *o.subtype + "' does not end with name '" + o.name + "'");
    }
    check(region_within(o.region, s.width, s.height),
          "region of instance '" + o.instance_id + "' outside image bounds");
  }
}

inline Scene scene_from_json(const nlohmann::json& j) {
  Scene s;
  s.image_id = j.at("image_id").get<std::string>();
  s.width = j.at("width").get<int>();
  s.height = j.at("height").get<int>();
  if (j.contains("scene_type") && !j.at("scene_type").is_null())
    s.scene_type = parse_scene_type(j.at("scene_type").get<std::string>());
  for (const auto& jo : j.at("objects")) {
    ObjectInstance o{jo.at("instance_id").get<std::string>(), jo.at("name").get<std::string>(),
                     std::nullopt, detail::region_from_json(jo.at("region"))};
    if (jo.contains("subtype") && !jo.at("subtype").is_null())
      o.subtype = jo.at("subtype").get<std::string>();
    s.objects.push_back(std::move(o));
  }
  s.depth_ref = j.at("depth_ref").get<std::string>();
  validate_scene(s);
  return s;
}

inline nlohmann::json scene_to_json(const Scene& s) {
  nlohmann::json j;
  j["image_id"] = s.image_id;
  j["width"] = s.width;
  j["height"] = s.height;
  j["scene_type"] = s.scene_type ? nlohmann::json(to_string(*s.scene_type)) : nlohmann::json(nullptr);
  j["objects"] = nlohmann::json::array();
  for (const ObjectInstance& o : s.objects) {
    nlohmann::json jo;
    jo["instance_id"] = o.instance_id;
    jo["name"] = o.name;
    if (o.subtype) jo["subtype"] = *o.subtype;
    jo["region"] = detail::region_to_json(o.region);
    j["objects"].push_back(std::move(jo));
  }
  j["depth_ref"] = s.depth_ref;
  return j;
}

inline Scene parse_scene_line(const std::string& line) {
  return scene_from_json(nlohmann::json::parse(line));
}

inline std::string scene_to_line(const Scene& s) { return scene_to_json(s).dump(); }

// Parses scene records, one per non-empty line. Any bad record fails the whole
// load; the message carries the 1-based line number.
inline std::vector<Scene> parse_scenes(const std::vector<std::string>& lines) {
  std::vector<Scene> scenes;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const std::string where = "line " + std::to_string(i + 1);
    Scene s;
    try {
      s = parse_scene_line(lines[i]);
    } catch (const nlohmann::json::exception& e) {
      fail("malformed scene record, " + where + ": " + e.what());
    } catch (const Error& e) {
      fail(std::string(e.what()) + ", " + where);
    }
    check(seen.insert(s.image_id).second, "duplicate image_id '" + s.image_id + "', " + where);
    scenes.push_back(std::move(s));
  }
  return scenes;
}

inline std::vector<Scene> load_scenes(const std::string& path) {
  return parse_scenes(text::read_lines(path));
}

inline std::string scenes_to_text(const std::vector<Scene>& scenes) {
  std::string out;
  for (const Scene& s : scenes) {
    out += scene_to_line(s);
    out += '\n';
  }
  return out;
}

inline void save_scenes(const std::string& path, const std::vector<Scene>& scenes) {
  text::write_file(path, scenes_to_text(scenes));
}

// Depth references are resolved against the scene file's directory unless
// absolute.
inline std::string resolve_depth_path(const std::string& scene_file, const std::string& depth_ref) {
  std::filesystem::path ref(depth_ref);
  if (ref.is_absolute()) return ref.string();
  return (std::filesystem::path(scene_file).parent_path() / ref).string();
}

// ---------------------------------------------------------------------------
// Depth rasters

// With `invert` set each value v becomes (v_max - v) + v_min, turning a
// disparity-style map into larger = farther.
inline DepthRaster parse_depth(const std::string& content, bool invert) {
  const auto tokens = text::split_ws(content);
  check(tokens.size() >= 3 && tokens[0] == "DR1", "depth raster must start with 'DR1 <width> <height>'");
  const long long w = text::parse_int(tokens[1], "depth width");
  const long long h = text::parse_int(tokens[2], "depth height");
  check(w > 0 && h > 0, "depth raster dimensions must be positive");
  const std::size_t expected = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  check(tokens.size() - 3 == expected, "depth raster has " + std::to_string(tokens.size() - 3) +
                                           " values, expected " + std::to_string(expected));
  std::vector<double> values;
  values.reserve(expected);
  for (std::size_t i = 3; i < tokens.size(); ++i) {
    const double v = text::parse_double(tokens[i], "depth value");
    check(std::isfinite(v) && v >= 0.0, "depth value must be finite and >= 0, got '" + tokens[i] + "'");
    values.push_back(v);
  }
  if (invert) {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double v_min = *lo, v_max = *hi;
    for (double& v : values) v = (v_max - v) + v_min;
  }
  return DepthRaster(static_cast<int>(w), static_cast<int>(h), std::move(values), invert);
}

inline DepthRaster load_depth(const std::string& path, bool invert = false) {
  try {
    return parse_depth(text::read_file(path), invert);
  } catch (const Error& e) {
    fail(path + ": " + e.what());
  }
}

inline std::string depth_to_text(const DepthRaster& d) {
  std::string out = "DR1 " + std::to_string(d.width()) + " " + std::to_string(d.height()) + "\n";
  for (int row = 0; row < d.height(); ++row) {
    for (int col = 0; col < d.width(); ++col) {
      if (col) out += ' ';
      out += text::format_double(d.at(col, row));
    }
    out += '\n';
  }
  return out;
}

inline void check_depth_matches(const Scene& s, const DepthRaster& d) {
  check(d.width() == s.width && d.height() == s.height,
        "depth raster " + std::to_string(d.width()) + "x" + std::to_string(d.height()) +
            " does not match scene '" + s.image_id + "' " + std::to_string(s.width) + "x" +
            std::to_string(s.height));
}

// ---------------------------------------------------------------------------
// Embedding tables

inline EmbeddingTable parse_embeddings(const std::vector<std::string>& lines) {
  EmbeddingTable table;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const auto tab = lines[i].find('\t');
    check(tab != std::string::npos, "embedding line " + std::to_string(i + 1) + ": missing tab after key");
    std::vector<double> vec;
    for (const auto& tok : text::split_ws(std::string_view(lines[i]).substr(tab + 1)))
      vec.push_back(text::parse_double(tok, "embedding value"));
    try {
      table.add(lines[i].substr(0, tab), std::move(vec));
    } catch (const Error& e) {
      fail("embedding line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return table;
}

inline EmbeddingTable load_embeddings(const std::string& path) {
  return parse_embeddings(text::read_lines(path));
}

inline std::string embeddings_to_text(const EmbeddingTable& t) {
  std::string out;
  for (const auto& [key, vec] : t.entries()) {
    out += key;
    out += '\t';
    for (std::size_t i = 0; i < vec.size(); ++i) {
      if (i) out += ' ';
      out += text::format_double(vec[i]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace vispk
