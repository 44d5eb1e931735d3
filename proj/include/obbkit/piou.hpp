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

#include <cstddef>
#include <cstdint>

#include "obbkit/geom.hpp"

namespace obbkit {

enum class PiouLossKind {
  kNegLog,   // -ln(piou)
  kOneMinus  // 1 - piou
};

struct PiouConfig {
  double k = 10.0;          // kernel steepness
  int resolution = 1;       // samples per pixel per axis
  double margin = 2.0;      // lattice expansion, pixels
  double eps = 1e-6;        // lower clamp on piou
  PiouLossKind loss = PiouLossKind::kNegLog;
  std::size_t max_samples = std::size_t{1} << 24;

  /// Throws ConfigError if any field is out of range.
  void validate() const;
};

/// Gradient of a scalar with respect to (x, y, w, h, theta) of a box.
struct Grad5 {
  double d_x = 0.0;
  double d_y = 0.0;
  double d_w = 0.0;
  double d_h = 0.0;
  double d_theta = 0.0;
};

/// Sample lattice: pixel centers at integer coordinates (x0 .. x0+nx-1,
/// y0 .. y0+ny-1), each subdivided into resolution^2 samples of weight
/// 1/resolution^2.
struct PixelRegion {
  std::int64_t x0 = 0;
  std::int64_t y0 = 0;
  std::int64_t nx = 0;
  std::int64_t ny = 0;
  int resolution = 1;

  double spacing() const { return 1.0 / resolution; }
  double weight() const { return 1.0 / (static_cast<double>(resolution) * resolution); }
  std::size_t sample_count() const;
};

/// Lattice covering the joint axis-aligned bounds of both boxes' corners,
/// expanded by cfg.margin. Throws BudgetError past cfg.max_samples.
PixelRegion pixel_region(const Obb& a, const Obb& b, const PiouConfig& cfg);

struct LocalDistances {
  double d_w = 0.0;
  double d_h = 0.0;
};

LocalDistances local_distances(Point p, const Obb& b);

/// Hard membership test: 1 iff d_w <= w/2 and d_h <= h/2.
int delta(Point p, const Obb& b);

/// Soft step K(d, s) = 1 - 1/(1 + exp(-k (d - s))).
double kernel(double d, double half_extent, double k);

/// Soft membership F(p|b) = K(d_w, w/2) K(d_h, h/2).
double contribution(Point p, const Obb& b, const PiouConfig& cfg);

struct PiouTerms {
  double intersection = 0.0;
  double union_area = 0.0;
  double piou = 0.0;     // after clamping to [eps, 1]
  bool clamped = false;
};

PiouTerms piou_terms(const Obb& b, const Obb& g, const PixelRegion& region, const PiouConfig& cfg);

double piou(const Obb& b, const Obb& g, const PiouConfig& cfg = {});
double piou(const Obb& b, const Obb& g, const PixelRegion& region, const PiouConfig& cfg);

double piou_loss(const Obb& b, const Obb& g, const PiouConfig& cfg = {});
double piou_loss(const Obb& b, const Obb& g, const PixelRegion& region, const PiouConfig& cfg);

struct LossAndGrad {
  double loss = 0.0;
  Grad5 grad;
};

/// Loss and its analytic gradient with respect to b (g is held constant) on a
/// fixed lattice. The gradient is zero when piou is clamped.
LossAndGrad piou_loss_and_grad(const Obb& b, const Obb& g, const PixelRegion& region, const PiouConfig& cfg);
LossAndGrad piou_loss_and_grad(const Obb& b, const Obb& g, const PiouConfig& cfg = {});

Grad5 piou_grad(const Obb& b, const Obb& g, const PiouConfig& cfg = {});

}  // namespace obbkit
