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

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the code path it is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "obbkit/evalkit.hpp"
#include "obbkit/geom.hpp"
#include "obbkit/piou.hpp"
#include "obbkit/random.hpp"

namespace obbkit::testing {

inline Obb random_canonical_box(Rng& rng, double min_extent, double max_extent, double center_range) {
  const double a = rng.uniform(min_extent, max_extent);
  const double b = rng.uniform(min_extent, max_extent);
  return canonicalize(rng.uniform(-center_range, center_range), rng.uniform(-center_range, center_range), a, b,
                      rng.uniform(0.0, kPi));
}

/// Point-in-rectangle test straight from the corner formula: p is inside iff
/// its projections onto both edge directions through corner 0 fall within
/// the edge lengths.
inline bool inside_quad(Point p, const Quad& q) {
  const Point e1 = q.pts[1] - q.pts[0];
  const Point e2 = q.pts[3] - q.pts[0];
  const Point d = p - q.pts[0];
  const double s = dot(d, e1), t = dot(d, e2);
  return s >= 0.0 && s <= dot(e1, e1) && t >= 0.0 && t <= dot(e2, e2);
}

struct MonteCarloIou {
  double estimate;
  double sigma;
};

/// Hit-rate estimate of IoU from uniform samples over the joint bounding box.
inline MonteCarloIou monte_carlo_iou(const Obb& a, const Obb& b, int samples, Rng& rng) {
  const Quad qa = corners(a), qb = corners(b);
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const Quad* q : {&qa, &qb}) {
    for (const Point& p : q->pts) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
  }
  long in_both = 0, in_any = 0;
  for (int i = 0; i < samples; ++i) {
    const Point p{rng.uniform(xmin, xmax), rng.uniform(ymin, ymax)};
    const bool ia = inside_quad(p, qa), ib = inside_quad(p, qb);
    in_both += (ia && ib);
    in_any += (ia || ib);
  }
  const double est = in_any > 0 ? static_cast<double>(in_both) / static_cast<double>(in_any) : 0.0;
  // Binomial standard error of a ratio estimated from `in_any` union hits.
  const double sigma = in_any > 0 ? std::sqrt(std::max(est * (1.0 - est), 1e-12) / static_cast<double>(in_any)) : 1.0;
  return {est, sigma};
}

/// Minimum enclosing-rectangle area by brute-force sweep over orientations.
inline std::pair<double, double> brute_force_min_rect(const std::vector<Point>& pts, int steps) {
  double best_area = 1e300, best_angle = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double a = kPi * i / steps;
    const Point u{std::cos(a), std::sin(a)}, v{-std::sin(a), std::cos(a)};
    double umin = 1e300, umax = -1e300, vmin = 1e300, vmax = -1e300;
    for (const Point& p : pts) {
      umin = std::min(umin, dot(p, u));
      umax = std::max(umax, dot(p, u));
      vmin = std::min(vmin, dot(p, v));
      vmax = std::max(vmax, dot(p, v));
    }
    const double area = (umax - umin) * (vmax - vmin);
    if (area < best_area) {
      best_area = area;
      best_angle = a;
    }
  }
  return {best_area, best_angle};
}

inline Obb perturb(const Obb& b, int param, double h) {
  Obb out = b;
  switch (param) {
    case 0: out.x += h; break;
    case 1: out.y += h; break;
    case 2: out.w += h; break;
    case 3: out.h += h; break;
    default: out.theta += h; break;
  }
  return out;
}

inline double component(const Grad5& g, int param) {
  switch (param) {
    case 0: return g.d_x;
    case 1: return g.d_y;
    case 2: return g.d_w;
    case 3: return g.d_h;
    default: return g.d_theta;
  }
}

/// Central finite differences of f around b, one parameter at a time.
inline Grad5 finite_difference(const std::function<double(const Obb&)>& f, const Obb& b, double h) {
  double d[5];
  for (int i = 0; i < 5; ++i) d[i] = (f(perturb(b, i, h)) - f(perturb(b, i, -h))) / (2.0 * h);
  return {d[0], d[1], d[2], d[3], d[4]};
}

inline double relative_error(double analytic, double numeric) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  return scale > 0.0 ? std::abs(analytic - numeric) / scale : 0.0;
}

/// Direct PIoU sum over the lattice with the textbook logistic, without any
/// of the library's frame caching or compensated summation.
inline double naive_piou(const Obb& b, const Obb& g, const PixelRegion& r, double k) {
  auto soft = [&](const Obb& box, double px, double py) {
    const double dx = px - box.x, dy = py - box.y;
    const double dw = std::abs(dx * std::sin(box.theta) + dy * std::cos(box.theta));
    const double dh = std::abs(dx * std::cos(box.theta) - dy * std::sin(box.theta));
    auto K = [&](double d, double s) { return 1.0 - 1.0 / (1.0 + std::exp(-k * (d - s))); };
    return K(dw, box.w / 2.0) * K(dh, box.h / 2.0);
  };
  long double inter = 0.0L;
  const int res = r.resolution;
  for (std::int64_t j = 0; j < r.ny * res; ++j) {
    for (std::int64_t i = 0; i < r.nx * res; ++i) {
      const double px = static_cast<double>(r.x0) - 0.5 + (static_cast<double>(i) + 0.5) / res;
      const double py = static_cast<double>(r.y0) - 0.5 + (static_cast<double>(j) + 0.5) / res;
      inter += static_cast<long double>(soft(b, px, py) * soft(g, px, py));
    }
  }
  const double i = static_cast<double>(inter) / (res * res);
  return i / (b.w * b.h + g.w * g.h - i);
}

/// Reference VOC07 evaluation: naive matching loops and the 11-point formula
/// with recall thresholds compared in exact integer arithmetic.
struct ReferenceClassAp {
  double ap = 0.0;
  std::size_t npos = 0;
};

inline std::vector<ReferenceClassAp> reference_voc07(const std::vector<Detection>& dets,
                                                     const std::vector<GroundTruth>& gts, double thr,
                                                     int num_classes,
                                                     const std::function<double(const Obb&, const Obb&)>& iou) {
  std::vector<ReferenceClassAp> out(static_cast<std::size_t>(num_classes));
  for (int c = 0; c < num_classes; ++c) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < dets.size(); ++i) {
      if (dets[i].class_id == c) order.push_back(i);
    }
    // Selection-style ranking: repeatedly pick the best remaining detection.
    std::vector<std::size_t> ranked;
    std::vector<bool> used(order.size(), false);
    for (std::size_t n = 0; n < order.size(); ++n) {
      std::size_t pick = order.size();
      for (std::size_t m = 0; m < order.size(); ++m) {
        if (used[m]) continue;
        if (pick == order.size()) {
          pick = m;
          continue;
        }
        const Detection& a = dets[order[m]];
        const Detection& b = dets[order[pick]];
        if (a.score > b.score || (a.score == b.score && a.image_id < b.image_id)) pick = m;
      }
      used[pick] = true;
      ranked.push_back(order[pick]);
    }

    std::size_t npos = 0;
    for (const GroundTruth& g : gts) npos += (g.class_id == c && !g.difficult);
    out[c].npos = npos;

    std::vector<bool> matched(gts.size(), false);
    std::size_t tp = 0, fp = 0;
    std::vector<std::pair<std::size_t, std::size_t>> curve;  // (tp, tp + fp)
    for (std::size_t di : ranked) {
      const Detection& d = dets[di];
      double best = -1.0;
      std::size_t best_gt = gts.size();
      for (std::size_t gi = 0; gi < gts.size(); ++gi) {
        const GroundTruth& g = gts[gi];
        if (g.class_id != c || g.image_id != d.image_id) continue;
        if (!g.difficult && matched[gi]) continue;
        const double ov = iou(d.box, g.box);
        if (ov >= thr && ov > best) {
          best = ov;
          best_gt = gi;
        }
      }
      if (best_gt == gts.size()) {
        ++fp;
      } else if (gts[best_gt].difficult) {
        continue;
      } else {
        matched[best_gt] = true;
        ++tp;
      }
      curve.emplace_back(tp, tp + fp);
    }
    if (npos == 0) continue;
    double ap = 0.0;
    for (std::size_t t = 0; t <= 10; ++t) {
      double p = 0.0;
      for (const auto& [ctp, cn] : curve) {
        // recall >= t/10  <=>  10 * tp >= t * npos
        if (10 * ctp >= t * npos) p = std::max(p, static_cast<double>(ctp) / static_cast<double>(cn));
      }
      ap += p / 11.0;
    }
    out[c].ap = ap;
  }
  return out;
}

/// Synthetic scene: ground truths plus jittered, duplicated and spurious
/// detections across a few images and classes.
struct Scene {
  std::vector<GroundTruth> gts;
  std::vector<Detection> dets;
};

inline Scene random_scene(Rng& rng, int num_classes, int num_images) {
  Scene s;
  for (int im = 0; im < num_images; ++im) {
    const std::string id = "img" + std::to_string(im);
    const int objects = 1 + static_cast<int>(rng.below(6));
    for (int o = 0; o < objects; ++o) {
      GroundTruth g{id, static_cast<int>(rng.below(static_cast<std::uint64_t>(num_classes))),
                    random_canonical_box(rng, 10.0, 40.0, 100.0), rng.coin(0.15)};
      s.gts.push_back(g);
      const int copies = static_cast<int>(rng.below(3));
      for (int k = 0; k < copies; ++k) {
        Obb b = g.box;
        b = canonicalize(b.x + rng.uniform(-4, 4), b.y + rng.uniform(-4, 4), b.w * rng.uniform(0.8, 1.2),
                         b.h * rng.uniform(0.8, 1.2), b.theta + rng.uniform(-0.3, 0.3));
        // Quantized scores produce ties.
        s.dets.push_back({id, rng.coin(0.9) ? g.class_id : static_cast<int>(rng.below(num_classes)),
                          std::round(rng.uniform() * 20.0) / 20.0, b});
      }
    }
    const int spurious = static_cast<int>(rng.below(3));
    for (int k = 0; k < spurious; ++k) {
      s.dets.push_back({id, static_cast<int>(rng.below(static_cast<std::uint64_t>(num_classes))),
                        std::round(rng.uniform() * 20.0) / 20.0, random_canonical_box(rng, 10.0, 40.0, 100.0)});
    }
  }
  return s;
}

}  // namespace obbkit::testing
