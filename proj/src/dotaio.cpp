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

#include "obbkit/dotaio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "obbkit/error.hpp"

namespace obbkit {

namespace {

constexpr std::string_view kTask1Prefix = "Task1_";
constexpr std::string_view kTask1Suffix = ".txt";

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(++line_no, line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
}

double parse_number(std::string_view tok, std::size_t line_no) {
  double v = 0.0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ParseError(line_no, fmt::format("malformed number '{}'", tok));
  }
  return v;
}

Quad parse_quad(std::span<const std::string_view> toks, std::size_t line_no) {
  Quad q;
  for (std::size_t i = 0; i < 4; ++i) {
    q.pts[i] = {parse_number(toks[2 * i], line_no), parse_number(toks[2 * i + 1], line_no)};
  }
  return q;
}

Obb quad_to_obb(const Quad& q, std::size_t line_no) {
  try {
    return min_area_rect(q.pts);
  } catch (const DegenerateGeometryError& e) {
    throw ParseError(line_no, e.what());
  }
}

}  // namespace

Obb Annotation::to_obb() const { return min_area_rect(quad.pts); }

AnnotationFile parse_annotations(std::string_view text, std::string image_id) {
  AnnotationFile file;
  file.image_id = std::move(image_id);
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const std::vector<std::string_view> toks = split_ws(line);
    if (toks.size() != 10) return;
    Annotation a;
    a.quad = parse_quad(toks, line_no);
    a.class_name = std::string(toks[8]);
    const double difficult = parse_number(toks[9], line_no);
    if (difficult != 0.0 && difficult != 1.0) {
      throw ParseError(line_no, fmt::format("difficult flag must be 0 or 1, got '{}'", toks[9]));
    }
    a.difficult = difficult == 1.0;
    file.objects.push_back(std::move(a));
  });
  return file;
}

ClassMap::ClassMap(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) throw ConfigError("class names must be non-empty");
    for (std::size_t j = 0; j < i; ++j) {
      if (names_[i] == names_[j]) throw ConfigError(fmt::format("duplicate class name '{}'", names_[i]));
    }
  }
}

ClassMap ClassMap::parse(std::string_view text) {
  std::vector<std::string> names;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const std::vector<std::string_view> toks = split_ws(line);
    if (toks.empty()) return;
    if (toks.size() != 1) throw ParseError(line_no, "class map lines hold exactly one name");
    names.emplace_back(toks[0]);
  });
  return ClassMap(std::move(names));
}

std::optional<int> ClassMap::find(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<int>(it - names_.begin());
}

int ClassMap::id(std::string_view name) const {
  if (const auto found = find(name)) return *found;
  throw ConfigError(fmt::format("unknown class '{}'", name));
}

const std::string& ClassMap::name(int id) const {
  if (id < 0 || id >= size()) throw ConfigError(fmt::format("unknown class id {}", id));
  return names_[static_cast<std::size_t>(id)];
}

std::vector<GroundTruth> to_ground_truth(const AnnotationFile& file, const ClassMap& classes) {
  std::vector<GroundTruth> out;
  out.reserve(file.objects.size());
  for (const Annotation& a : file.objects) {
    out.push_back({file.image_id, classes.id(a.class_name), a.to_obb(), a.difficult});
  }
  return out;
}

std::string format_detection_line(const Detection& d) {
  if (d.image_id.empty() || std::any_of(d.image_id.begin(), d.image_id.end(),
                                        [](char c) { return std::isspace(static_cast<unsigned char>(c)); })) {
    throw ConfigError(fmt::format("image id '{}' must be non-empty without whitespace", d.image_id));
  }
  const Quad q = corners(d.box);
  return fmt::format("{} {:.6f} {:.6f} {:.6f} {:.6f} {:.6f} {:.6f} {:.6f} {:.6f} {:.6f}", d.image_id, d.score,
                     q.pts[0].x, q.pts[0].y, q.pts[1].x, q.pts[1].y, q.pts[2].x, q.pts[2].y, q.pts[3].x, q.pts[3].y);
}

std::vector<Detection> parse_detection_lines(std::string_view text, int class_id) {
  std::vector<Detection> out;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const std::vector<std::string_view> toks = split_ws(line);
    if (toks.empty()) return;
    if (toks.size() != 10) {
      throw ParseError(line_no, fmt::format("expected 10 tokens (imgid score x1 y1 ... y4), got {}", toks.size()));
    }
    Detection d;
    d.image_id = std::string(toks[0]);
    d.class_id = class_id;
    d.score = parse_number(toks[1], line_no);
    d.box = quad_to_obb(parse_quad(std::span(toks).subspan(2), line_no), line_no);
    out.push_back(std::move(d));
  });
  return out;
}

std::string task1_file_name(std::string_view class_name) {
  return fmt::format("{}{}{}", kTask1Prefix, class_name, kTask1Suffix);
}

void write_detections(const std::filesystem::path& dir, std::span<const Detection> dets, const ClassMap& classes) {
  std::vector<std::string> bodies(static_cast<std::size_t>(classes.size()));
  for (const Detection& d : dets) {
    classes.name(d.class_id);
    bodies[static_cast<std::size_t>(d.class_id)] += format_detection_line(d) + '\n';
  }
  std::filesystem::create_directories(dir);
  for (int c = 0; c < classes.size(); ++c) {
    const std::filesystem::path path = dir / task1_file_name(classes.name(c));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << bodies[static_cast<std::size_t>(c)];
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  }
}

std::vector<std::string> detection_class_names(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw std::runtime_error(fmt::format("not a directory: {}", dir.string()));
  }
  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string file = entry.path().filename().string();
    if (!entry.is_regular_file() || !file.starts_with(kTask1Prefix) || !file.ends_with(kTask1Suffix)) continue;
    std::string name = file.substr(kTask1Prefix.size(), file.size() - kTask1Prefix.size() - kTask1Suffix.size());
    if (!name.empty()) names.push_back(std::move(name));
  }
  std::sort(names.begin(), names.end());
  return names;
}

std::vector<Detection> parse_detections(const std::filesystem::path& dir, const ClassMap& classes) {
  std::vector<Detection> out;
  for (const std::string& name : detection_class_names(dir)) {
    const int id = classes.id(name);
    const std::filesystem::path path = dir / task1_file_name(name);
    std::vector<Detection> dets;
    try {
      dets = parse_detection_lines(read_text_file(path), id);
    } catch (const ParseError& e) {
      throw ParseError(e.line(), fmt::format("{}: {}", path.string(), e.detail()));
    }
    out.insert(out.end(), std::make_move_iterator(dets.begin()), std::make_move_iterator(dets.end()));
  }
  return out;
}

std::vector<TileWindow> tile_windows(std::int64_t width, std::int64_t height, std::int64_t patch,
                                     std::int64_t stride) {
  if (width <= 0 || height <= 0) {
    throw ConfigError(fmt::format("image dimensions must be positive, got {}x{}", width, height));
  }
  if (patch <= 0) throw ConfigError(fmt::format("patch must be positive, got {}", patch));
  if (stride <= 0 || stride > patch) {
    throw ConfigError(fmt::format("stride must lie in (0, patch], got {}", stride));
  }
  auto origins = [&](std::int64_t dim) {
    std::vector<std::int64_t> out;
    for (std::int64_t o = 0;; o += stride) {
      if (o + patch >= dim) {
        out.push_back(std::max<std::int64_t>(0, dim - patch));
        break;
      }
      out.push_back(o);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };
  const std::vector<std::int64_t> xs = origins(width), ys = origins(height);
  std::vector<TileWindow> windows;
  windows.reserve(xs.size() * ys.size());
  for (std::int64_t y : ys) {
    for (std::int64_t x : xs) windows.push_back({x, y, std::min(patch, width), std::min(patch, height)});
  }
  return windows;
}

std::vector<Detection> merge_patch_detections(std::span<const PatchDetections> patches,
                                              std::span<const TileWindow> windows, double nms_tau) {
  std::vector<Detection> shifted;
  for (const PatchDetections& p : patches) {
    if (p.window >= windows.size()) {
      throw ConfigError(fmt::format("window index {} out of range ({} windows)", p.window, windows.size()));
    }
    const TileWindow& w = windows[p.window];
    for (Detection d : p.detections) {
      d.box.x += static_cast<double>(w.x0);
      d.box.y += static_cast<double>(w.y0);
      shifted.push_back(std::move(d));
    }
  }
  return batched_rotated_nms(shifted, nms_tau);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace obbkit
