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

#include <array>
#include <cmath>
#include <numbers>
#include <span>

namespace obbkit {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point operator*(Point a, double s) { return {a.x * s, a.y * s}; }
  friend constexpr Point operator*(double s, Point a) { return {a.x * s, a.y * s}; }
  friend constexpr Point operator/(Point a, double s) { return {a.x / s, a.y / s}; }
  friend constexpr bool operator==(Point a, Point b) = default;
};

constexpr double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }

/// Oriented bounding box.
///
/// `w` is the long edge and `theta` the angle (radians) between the long edge
/// and the y-axis. The long-edge unit vector is (sin theta, cos theta) and the
/// short-edge unit vector is (cos theta, -sin theta). A canonical box has
/// w >= h and theta in [0, pi); squares additionally have theta in [0, pi/2).
struct Obb {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  double theta = 0.0;

  Point center() const { return {x, y}; }
  double area() const { return w * h; }

  friend bool operator==(const Obb&, const Obb&) = default;
};

/// Four corners, counter-clockwise.
struct Quad {
  std::array<Point, 4> pts;
};

/// Additive refinement of an initial box.
struct Offset5 {
  double dx = 0.0;
  double dy = 0.0;
  double dw = 0.0;
  double dh = 0.0;
  double dtheta = 0.0;
};

/// Nine ACM sampling points in kernel row-major order plus their offsets
/// (dx, dy) relative to the regular 3x3 grid, in feature-map units.
struct AcmPointSet {
  std::array<Point, 9> points;
  std::array<Point, 9> offsets;
};

inline constexpr double kPi = std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

inline Point long_axis(double theta) { return {std::sin(theta), std::cos(theta)}; }
inline Point short_axis(double theta) { return {std::cos(theta), -std::sin(theta)}; }

/// Relative tolerance under which w and h are considered equal (square box).
inline constexpr double kSquareTolerance = 1e-9;

Obb canonicalize(double x, double y, double w, double h, double theta);
Obb canonicalize(const Obb& raw);
bool is_canonical(const Obb& b);

Quad corners(const Obb& b);

/// Minimum-area enclosing rectangle (rotating calipers over the convex hull).
Obb min_area_rect(std::span<const Point> pts);

Obb apply_offsets(const Obb& init, const Offset5& off);

/// Kernel cell (gx, gy) in {-1, 0, 1}^2 for row-major slot i.
constexpr Point acm_grid_cell(int slot) {
  return {static_cast<double>(slot % 3 - 1), static_cast<double>(slot / 3 - 1)};
}

AcmPointSet acm_points(const Obb& b, Point loc, double stride);

/// Smallest distance between two angles modulo pi, in [0, pi/2].
double angle_distance_mod_pi(double a, double b);

}  // namespace obbkit
