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

#include <vector>

#include "obbkit/geom.hpp"

namespace obbkit {

/// Convex CCW polygon; the intersection of two quads has at most 8 vertices.
struct ClipPolygon {
  std::vector<Point> pts;

  bool empty() const { return pts.empty(); }
};

/// Points within this distance of a clip edge count as inside.
inline constexpr double kClipTolerance = 1e-12;

/// Convex intersection of two quads (Sutherland-Hodgman). Either orientation
/// is accepted; the result is CCW.
ClipPolygon intersect(const Quad& a, const Quad& b);

/// Shoelace area; 0 for empty or degenerate polygons.
double area(const ClipPolygon& p);

/// Exact rotated IoU. Symmetric bit-for-bit in its arguments.
double iou_exact(const Obb& a, const Obb& b);

}  // namespace obbkit
