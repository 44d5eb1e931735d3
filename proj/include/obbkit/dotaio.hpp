// Copyright 2026 The obbkit Authors.
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "obbkit/evalkit.hpp"
#include "obbkit/geom.hpp"

namespace obbkit {

struct Annotation {
  Quad quad;  // as written in the file, not reoriented
  std::string class_name;
  bool difficult = false;

  Obb to_obb() const;
};

struct AnnotationFile {
  std::string image_id;
  std::vector<Annotation> objects;
};

/// DOTA v1.0 ground truth: "x1 y1 x2 y2 x3 y3 x4 y4 class difficult" per
/// object. Lines with any other token count (imagesource:, gsd:) are skipped.
AnnotationFile parse_annotations(std::string_view text, std::string image_id);

/// Ordered, case-sensitive class names; the id is the position.
class ClassMap {
 public:
  ClassMap() = default;
  explicit ClassMap(std::vector<std::string> names);

  /// One name per line; blank lines ignored.
  static ClassMap parse(std::string_view text);

  std::optional<int> find(std::string_view name) const;
  /// Throws ConfigError for unknown names.
  int id(std::string_view name) const;
  const std::string& name(int id) const;
  int size() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
};

std::vector<GroundTruth> to_ground_truth(const AnnotationFile& file, const ClassMap& classes);

/// One Task1 line: "imgid score x1 y1 x2 y2 x3 y3 x4 y4" (corners of the box).
std::string format_detection_line(const Detection& d);

/// Lines of one Task1 file; every detection gets `class_id`.
std::vector<Detection> parse_detection_lines(std::string_view text, int class_id);

std::string task1_file_name(std::string_view class_name);

/// Writes Task1_{class}.txt for every class in the map, empty files included.
void write_detections(const std::filesystem::path& dir, std::span<const Detection> dets, const ClassMap& classes);

/// Reads every Task1_{class}.txt in `dir`; classes must be in the map.
std::vector<Detection> parse_detections(const std::filesystem::path& dir, const ClassMap& classes);

/// Class names found in Task1_*.txt file names under `dir`.
std::vector<std::string> detection_class_names(const std::filesystem::path& dir);

struct TileWindow {
  std::int64_t x0 = 0;
  std::int64_t y0 = 0;
  std::int64_t width = 0;
  std::int64_t height = 0;

  friend bool operator==(const TileWindow&, const TileWindow&) = default;
};

/// Crop windows in row-major order (y outer, x inner). The last window on
/// each axis is shifted back so its far edge meets the image edge.
std::vector<TileWindow> tile_windows(std::int64_t width, std::int64_t height, std::int64_t patch,
                                     std::int64_t stride);

struct PatchDetections {
  std::size_t window = 0;  // index into the window list
  std::vector<Detection> detections;  // boxes in window-local coordinates
};

/// Shifts patch detections into image coordinates and applies rotated NMS per
/// (image id, class id).
std::vector<Detection> merge_patch_detections(std::span<const PatchDetections> patches,
                                              std::span<const TileWindow> windows, double nms_tau = 0.1);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace obbkit
