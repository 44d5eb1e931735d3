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

#include "obbkit/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "obbkit/error.hpp"

namespace obbkit {

namespace {

// Reduces an angle into [0, period).
double wrap(double theta, double period) {
  double r = std::fmod(theta, period);
  if (r < 0.0) r += period;
  if (r >= period) r = 0.0;
  return r;
}

bool all_finite(std::initializer_list<double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

// Andrew's monotone chain; collinear points are dropped.
std::vector<Point> convex_hull(std::span<const Point> input) {
  std::vector<Point> pts(input.begin(), input.end());
  std::sort(pts.begin(), pts.end(), [](Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point& p : pts) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, base = k + 1; i-- > 0;) {
    const Point& p = pts[i];
    while (k >= base && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace

Obb canonicalize(double x, double y, double w, double h, double theta) {
  if (!all_finite({x, y, w, h, theta})) {
    throw InvalidBoxError(fmt::format("box has non-finite field: ({}, {}, {}, {}, {})", x, y, w, h, theta));
  }
  if (w <= 0.0 || h <= 0.0) {
    throw InvalidBoxError(fmt::format("box extents must be positive, got w={} h={}", w, h));
  }
  if (w < h) {
    std::swap(w, h);
    theta += kPi / 2.0;
  }
  const bool square = (w - h) <= kSquareTolerance * w;
  return {x, y, w, h, wrap(theta, square ? kPi / 2.0 : kPi)};
}

Obb canonicalize(const Obb& raw) { return canonicalize(raw.x, raw.y, raw.w, raw.h, raw.theta); }

bool is_canonical(const Obb& b) {
  if (!all_finite({b.x, b.y, b.w, b.h, b.theta}) || b.h <= 0.0 || b.w < b.h) return false;
  const bool square = (b.w - b.h) <= kSquareTolerance * b.w;
  return b.theta >= 0.0 && b.theta < (square ? kPi / 2.0 : kPi);
}

Quad corners(const Obb& b) {
  const Point c = b.center();
  const Point hw = long_axis(b.theta) * (b.w / 2.0);
  const Point hh = short_axis(b.theta) * (b.h / 2.0);
  // short axis x long axis = +1, so (+h,+w) -> (-h,+w) -> (-h,-w) -> (+h,-w) is CCW.
  return {{c + hh + hw, c - hh + hw, c - hh - hw, c + hh - hw}};
}

Obb min_area_rect(std::span<const Point> pts) {
  if (pts.size() < 3) {
    throw DegenerateGeometryError(fmt::format("min_area_rect needs at least 3 points, got {}", pts.size()));
  }
  for (const Point& p : pts) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw DegenerateGeometryError("non-finite point");
  }
  const std::vector<Point> hull = convex_hull(pts);
  if (hull.size() < 3) throw DegenerateGeometryError("points are collinear");

  double best_area = std::numeric_limits<double>::infinity();
  Obb best{};
  const std::size_t n = hull.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point edge = hull[(i + 1) % n] - hull[i];
    const double len = std::hypot(edge.x, edge.y);
    if (len == 0.0) continue;
    const Point u = edge / len;
    const Point v{-u.y, u.x};
    double umin = std::numeric_limits<double>::infinity(), umax = -umin;
    double vmin = umin, vmax = -umin;
    // Projections relative to the edge origin keep cancellation small for
    // boxes far from the coordinate origin.
    for (const Point& p : hull) {
      const Point d = p - hull[i];
      const double pu = dot(d, u);
      const double pv = dot(d, v);
      umin = std::min(umin, pu);
      umax = std::max(umax, pu);
      vmin = std::min(vmin, pv);
      vmax = std::max(vmax, pv);
    }
    const double area = (umax - umin) * (vmax - vmin);
    if (area < best_area) {
      best_area = area;
      const Point c = hull[i] + u * ((umin + umax) / 2.0) + v * ((vmin + vmax) / 2.0);
      // The rectangle edge along u becomes the w-axis: (sin t, cos t) = u.
      best = {c.x, c.y, umax - umin, vmax - vmin, std::atan2(u.x, u.y)};
    }
  }
  if (!(best_area > 0.0)) throw DegenerateGeometryError("points enclose zero area");
  return canonicalize(best);
}

Obb apply_offsets(const Obb& init, const Offset5& off) {
  if (!all_finite({off.dx, off.dy, off.dw, off.dh, off.dtheta})) {
    throw InvalidRefinementError("offset has non-finite component");
  }
  const double w = init.w + off.dw;
  const double h = init.h + off.dh;
  if (!(w > 0.0) || !(h > 0.0)) {
    throw InvalidRefinementError(fmt::format("refined extents must be positive, got w={} h={}", w, h));
  }
  return canonicalize(init.x + off.dx, init.y + off.dy, w, h, init.theta + off.dtheta);
}

AcmPointSet acm_points(const Obb& b, Point loc, double stride) {
  if (!(stride > 0.0) || !std::isfinite(stride)) {
    throw ConfigError(fmt::format("stride must be positive, got {}", stride));
  }
  if (!std::isfinite(loc.x) || !std::isfinite(loc.y)) throw ConfigError("sampling location is not finite");
  const Obb box = canonicalize(b);
  const Point c = box.center();
  const Point hw = long_axis(box.theta) * (box.w / 2.0);
  const Point hh = short_axis(box.theta) * (box.h / 2.0);

  // A point c + sh*hh + sw*hw lands in kernel cell (gx, gy) = (sh, sw): at
  // theta = 0 the short axis is +x and the long axis is +y, so a box that
  // exactly covers the kernel footprint yields all-zero offsets.
  AcmPointSet out{};
  for (int slot = 0; slot < 9; ++slot) {
    const Point g = acm_grid_cell(slot);
    out.points[slot] = (g.x == 0.0 && g.y == 0.0) ? loc : c + hh * g.x + hw * g.y;
    out.offsets[slot] = (out.points[slot] - (loc + g * stride)) / stride;
  }
  return out;
}

double angle_distance_mod_pi(double a, double b) {
  const double d = wrap(a - b, kPi);
  return std::min(d, kPi - d);
}

}  // namespace obbkit
