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

// Scene data model and the region/depth geometry every extractor builds on.
//
// Image coordinates are in pixels with y growing downward, so the visually
// lowest point of a region is its maximum y. Depth rasters always follow the
// "larger = farther" convention; disparity-style sources are flipped at load.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "vispk/error.hpp"
#include "vispk/text.hpp"

namespace vispk {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct Box {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
  friend bool operator==(const Box&, const Box&) = default;
};

namespace detail {

// Twice the signed shoelace area; positive for counter-clockwise loops in a
// y-up frame.
inline double twice_signed_area(const std::vector<Point>& v) {
  double acc = 0.0;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    acc += v[j].x * v[i].y - v[i].x * v[j].y;
  }
  return acc;
}

}  // namespace detail

// A box or a simple polygon. Construction validates the shape, so every
// Region in circulation has positive area.
class Region {
 public:
  enum class Kind { kBox, kPolygon };

  static Region box(double x_min, double y_min, double x_max, double y_max) {
    check(x_min < x_max && y_min < y_max, "degenerate box");
    check(std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
              std::isfinite(y_max),
          "non-finite box coordinate");
    return Region(Box{x_min, y_min, x_max, y_max});
  }

  static Region polygon(std::vector<Point> vertices) {
    check(vertices.size() >= 3, "polygon needs at least 3 vertices");
    for (const Point& p : vertices)
      check(std::isfinite(p.x) && std::isfinite(p.y), "non-finite polygon vertex");
    check(detail::twice_signed_area(vertices) != 0.0, "zero-area polygon");
    return Region(std::move(vertices));
  }

  Kind kind() const { return std::holds_alternative<Box>(shape_) ? Kind::kBox : Kind::kPolygon; }
  bool is_box() const { return kind() == Kind::kBox; }
  const Box& as_box() const { return std::get<Box>(shape_); }
  const std::vector<Point>& as_polygon() const { return std::get<std::vector<Point>>(shape_); }

  // Axis-aligned bounds of the shape.
  Box bounds() const {
    if (is_box()) return as_box();
    Box b{as_polygon()[0].x, as_polygon()[0].y, as_polygon()[0].x, as_polygon()[0].y};
    for (const Point& p : as_polygon()) {
      b.x_min = std::min(b.x_min, p.x);
      b.y_min = std::min(b.y_min, p.y);
      b.x_max = std::max(b.x_max, p.x);
      b.y_max = std::max(b.y_max, p.y);
    }
    return b;
  }

  Region translated(double dx, double dy) const {
    if (is_box()) {
      const Box& b = as_box();
      return Region(Box{b.x_min + dx, b.y_min + dy, b.x_max + dx, b.y_max + dy});
    }
    std::vector<Point> v = as_polygon();
    for (Point& p : v) p = {p.x + dx, p.y + dy};
    return Region(std::move(v));
  }

  friend bool operator==(const Region&, const Region&) = default;

 private:
  explicit Region(Box b) : shape_(b) {}
  explicit Region(std::vector<Point> v) : shape_(std::move(v)) {}

  std::variant<Box, std::vector<Point>> shape_;
};

enum class SceneType { kBedroom, kBathroom, kKitchen, kLivingRoom, kOffice };

inline constexpr std::array<SceneType, 5> kAllSceneTypes = {
    SceneType::kBedroom, SceneType::kBathroom, SceneType::kKitchen, SceneType::kLivingRoom,
    SceneType::kOffice};

inline std::string to_string(SceneType t) {
  switch (t) {
    case SceneType::kBedroom: return "bedroom";
    case SceneType::kBathroom: return "bathroom";
    case SceneType::kKitchen: return "kitchen";
    case SceneType::kLivingRoom: return "living room";
    case SceneType::kOffice: return "office";
  }
  return "";
}

inline SceneType parse_scene_type(std::string_view s) {
  for (SceneType t : kAllSceneTypes)
    if (to_string(t) == s) return t;
  fail("unknown scene type '" + std::string(s) + "'");
}

struct ObjectInstance {
  std::string instance_id;
  std::string name;
  std::optional<std::string> subtype;
  Region region;

  // Subtype when annotated, otherwise the bare name.
  const std::string& key() const { return subtype ? *subtype : name; }

  friend bool operator==(const ObjectInstance&, const ObjectInstance&) = default;
};

struct Scene {
  std::string image_id;
  int width = 0;
  int height = 0;
  std::optional<SceneType> scene_type;
  std::vector<ObjectInstance> objects;
  std::string depth_ref;

  friend bool operator==(const Scene&, const Scene&) = default;
};

// Row-major depth grid, larger = farther.
class DepthRaster {
 public:
  DepthRaster() = default;

  DepthRaster(int width, int height, std::vector<double> values, bool inverted = false)
      : width_(width), height_(height), values_(std::move(values)), inverted_(inverted) {
    check(width > 0 && height > 0, "depth raster dimensions must be positive");
    check(values_.size() == static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
          "depth raster has " + std::to_string(values_.size()) + " values, expected " +
              std::to_string(static_cast<std::size_t>(width) * static_cast<std::size_t>(height)));
    for (double v : values_) check(std::isfinite(v) && v >= 0.0, "depth values must be finite and >= 0");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<double>& values() const { return values_; }
  // True when the source was disparity-like and has been flipped at load.
  bool inverted() const { return inverted_; }

  double at(int col, int row) const {
    return values_[static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
                   static_cast<std::size_t>(col)];
  }

  friend bool operator==(const DepthRaster&, const DepthRaster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
  bool inverted_ = false;
};

// Keyed embedding vectors. Keys live in three namespaces: "image:<id>",
// "region:<image_id>/<instance_id>" and "text:<string>".
class EmbeddingTable {
 public:
  void add(std::string key, std::vector<double> vec) {
    check(!vec.empty(), "empty embedding for key '" + key + "'");
    if (dim_ == 0) dim_ = vec.size();
    check(vec.size() == dim_, "embedding for '" + key + "' has dimension " +
                                  std::to_string(vec.size()) + ", expected " +
                                  std::to_string(dim_));
    double norm2 = 0.0;
    for (double v : vec) {
      check(std::isfinite(v), "non-finite embedding value for '" + key + "'");
      norm2 += v * v;
    }
    check(norm2 > 0.0, "zero-norm embedding for '" + key + "'");
    table_[std::move(key)] = std::move(vec);
  }

  bool contains(const std::string& key) const { return table_.count(key) > 0; }

  const std::vector<double>& get(const std::string& key) const {
    auto it = table_.find(key);
    if (it == table_.end()) fail("missing embedding: " + key);
    return it->second;
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return table_.size(); }
  const std::map<std::string, std::vector<double>>& entries() const { return table_; }

  static std::string image_key(std::string_view image_id) { return "image:" + std::string(image_id); }
  static std::string region_key(std::string_view image_id, std::string_view instance_id) {
    return "region:" + std::string(image_id) + "/" + std::string(instance_id);
  }
  static std::string text_key(std::string_view s) { return "text:" + std::string(s); }

 private:
  std::size_t dim_ = 0;
  std::map<std::string, std::vector<double>> table_;
};

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  check(a.size() == b.size(), "cosine of vectors with different dimensions");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// ---------------------------------------------------------------------------
// Geometry

// Even-odd rule. Points exactly on an edge fall on whichever side the
// crossing test puts them; the result is deterministic.
inline bool point_in_polygon(const std::vector<Point>& poly, Point p) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point& a = poly[i];
    const Point& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

inline double region_area(const Region& r) {
  if (r.is_box()) {
    const Box& b = r.as_box();
    return (b.x_max - b.x_min) * (b.y_max - b.y_min);
  }
  return std::abs(detail::twice_signed_area(r.as_polygon())) / 2.0;
}

inline Point region_centroid(const Region& r) {
  if (r.is_box()) {
    const Box& b = r.as_box();
    return {(b.x_min + b.x_max) / 2.0, (b.y_min + b.y_max) / 2.0};
  }
  const auto& v = r.as_polygon();
  double a2 = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    const double d = v[j].x * v[i].y - v[i].x * v[j].y;
    a2 += d;
    cx += (v[j].x + v[i].x) * d;
    cy += (v[j].y + v[i].y) * d;
  }
  check(a2 != 0.0, "zero-area polygon has no centroid");
  return {cx / (3.0 * a2), cy / (3.0 * a2)};
}

// Visually lowest point: the largest y in image coordinates.
inline double region_lowest_point_y(const Region& r) { return r.bounds().y_max; }

// Arithmetic mean of depth at the integer pixel centres (col + 0.5, row + 0.5)
// covered by the region.
inline double region_mean_depth(const Region& r, const DepthRaster& d) {
  const Box bb = r.bounds();
  check(bb.x_min >= 0.0 && bb.y_min >= 0.0 && bb.x_max <= d.width() && bb.y_max <= d.height(),
        "region outside depth raster bounds");
  const int col_lo = std::max(0, static_cast<int>(std::floor(bb.x_min - 0.5)));
  const int col_hi = std::min(d.width() - 1, static_cast<int>(std::ceil(bb.x_max - 0.5)));
  const int row_lo = std::max(0, static_cast<int>(std::floor(bb.y_min - 0.5)));
  const int row_hi = std::min(d.height() - 1, static_cast<int>(std::ceil(bb.y_max - 0.5)));

  double sum = 0.0;
  std::size_t n = 0;
  for (int row = row_lo; row <= row_hi; ++row) {
    const double cy = row + 0.5;
    for (int col = col_lo; col <= col_hi; ++col) {
      const double cx = col + 0.5;
      bool inside;
      if (r.is_box()) {
        const Box& b = r.as_box();
        inside = cx >= b.x_min && cx <= b.x_max && cy >= b.y_min && cy <= b.y_max;
      } else {
        inside = point_in_polygon(r.as_polygon(), {cx, cy});
      }
      if (inside) {
        sum += d.at(col, row);
        ++n;
      }
    }
  }
  check(n > 0, "empty region sample");
  return sum / static_cast<double>(n);
}

inline bool region_within(const Region& r, int width, int height) {
  const Box b = r.bounds();
  return b.x_min >= 0.0 && b.y_min >= 0.0 && b.x_max <= width && b.y_max <= height;
}

}  // namespace vispk
