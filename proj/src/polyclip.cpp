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

#include "obbkit/polyclip.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace obbkit {

namespace {

double signed_area(const std::vector<Point>& pts) {
  const std::size_t n = pts.size();
  if (n < 3) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += cross(pts[i], pts[(i + 1) % n]);
  return acc / 2.0;
}

std::vector<Point> ccw(const Quad& q) {
  std::vector<Point> pts(q.pts.begin(), q.pts.end());
  if (signed_area(pts) < 0.0) std::reverse(pts.begin(), pts.end());
  return pts;
}

// Keeps the part of `subject` left of the directed edge a->b.
std::vector<Point> clip_half_plane(const std::vector<Point>& subject, Point a, Point b) {
  const Point e = b - a;
  const double len = std::hypot(e.x, e.y);
  std::vector<Point> out;
  if (subject.empty() || len == 0.0) return out;
  out.reserve(subject.size() + 1);

  auto distance = [&](Point p) { return cross(e, p - a) / len; };
  const std::size_t n = subject.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point cur = subject[i];
    const Point next = subject[(i + 1) % n];
    const double dc = distance(cur);
    const double dn = distance(next);
    const bool cur_in = dc >= -kClipTolerance;
    const bool next_in = dn >= -kClipTolerance;
    if (cur_in) out.push_back(cur);
    if (cur_in != next_in) {
      // Strictly opposite sides here unless one lies inside the tolerance band.
      if ((cur_in && dc > kClipTolerance) || (next_in && dn > kClipTolerance)) {
        const double t = dc / (dc - dn);
        out.push_back(cur + (next - cur) * t);
      }
    }
  }
  return out;
}

void drop_duplicates(std::vector<Point>& pts) {
  auto close = [](Point a, Point b) {
    return std::abs(a.x - b.x) <= kClipTolerance && std::abs(a.y - b.y) <= kClipTolerance;
  };
  std::vector<Point> out;
  out.reserve(pts.size());
  for (const Point& p : pts) {
    if (out.empty() || !close(out.back(), p)) out.push_back(p);
  }
  while (out.size() > 1 && close(out.front(), out.back())) out.pop_back();
  pts = std::move(out);
}

auto key(const Obb& b) { return std::tie(b.x, b.y, b.w, b.h, b.theta); }

}  // namespace

ClipPolygon intersect(const Quad& a, const Quad& b) {
  std::vector<Point> poly = ccw(a);
  const std::vector<Point> clip = ccw(b);
  for (std::size_t i = 0; i < clip.size() && !poly.empty(); ++i) {
    poly = clip_half_plane(poly, clip[i], clip[(i + 1) % clip.size()]);
  }
  drop_duplicates(poly);
  if (poly.size() < 3) poly.clear();
  return {std::move(poly)};
}

double area(const ClipPolygon& p) { return std::max(0.0, signed_area(p.pts)); }

double iou_exact(const Obb& a, const Obb& b) {
  // Clip in a fixed argument order so that swapping the inputs cannot change
  // a single bit of the result.
  const bool swap = key(b) < key(a);
  const Obb& first = swap ? b : a;
  const Obb& second = swap ? a : b;
  const double inter = area(intersect(corners(first), corners(second)));
  if (inter <= 0.0) return 0.0;
  const double uni = first.area() + second.area() - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace obbkit
