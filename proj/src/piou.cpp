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

#include "obbkit/piou.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "obbkit/error.hpp"

namespace obbkit {

namespace {

// Neumaier compensated sum: the result depends only on the order of add()
// calls, which the lattice walk fixes.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void check_box(const Obb& b) {
  if (!std::isfinite(b.x) || !std::isfinite(b.y) || !std::isfinite(b.theta) || !std::isfinite(b.w) ||
      !std::isfinite(b.h) || !(b.w > 0.0) || !(b.h > 0.0)) {
    throw InvalidBoxError(fmt::format("invalid box ({}, {}, {}, {}, {})", b.x, b.y, b.w, b.h, b.theta));
  }
}

// Frame of a box, precomputed once per lattice walk.
struct BoxFrame {
  double x, y, s, c, half_w, half_h;

  explicit BoxFrame(const Obb& b)
      : x(b.x), y(b.y), s(std::sin(b.theta)), c(std::cos(b.theta)), half_w(b.w / 2.0), half_h(b.h / 2.0) {}

  // Signed coordinates of p along the long and short axes.
  double along_w(double px, double py) const { return (px - x) * s + (py - y) * c; }
  double along_h(double px, double py) const { return (px - x) * c - (py - y) * s; }
};

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double finish_loss(double p, PiouLossKind kind) {
  return kind == PiouLossKind::kNegLog ? -std::log(p) : 1.0 - p;
}

template <typename Visitor>
void walk_lattice(const PixelRegion& region, Visitor&& visit) {
  const double spacing = region.spacing();
  const std::int64_t sx = region.nx * region.resolution;
  const std::int64_t sy = region.ny * region.resolution;
  const double ox = static_cast<double>(region.x0) - 0.5;
  const double oy = static_cast<double>(region.y0) - 0.5;
  for (std::int64_t j = 0; j < sy; ++j) {
    const double py = oy + (static_cast<double>(j) + 0.5) * spacing;
    for (std::int64_t i = 0; i < sx; ++i) {
      visit(ox + (static_cast<double>(i) + 0.5) * spacing, py);
    }
  }
}

}  // namespace

void PiouConfig::validate() const {
  if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError(fmt::format("k must be positive, got {}", k));
  if (resolution < 1) throw ConfigError(fmt::format("resolution must be >= 1, got {}", resolution));
  if (!(margin >= 0.0) || !std::isfinite(margin)) {
    throw ConfigError(fmt::format("margin must be non-negative, got {}", margin));
  }
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError(fmt::format("eps must lie in (0, 1), got {}", eps));
  if (max_samples == 0) throw ConfigError("max_samples must be positive");
}

std::size_t PixelRegion::sample_count() const {
  return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(resolution) *
         static_cast<std::size_t>(resolution);
}

PixelRegion pixel_region(const Obb& a, const Obb& b, const PiouConfig& cfg) {
  cfg.validate();
  check_box(a);
  check_box(b);
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const Quad& q : {corners(a), corners(b)}) {
    for (const Point& p : q.pts) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
  }
  const double x_lo = std::floor(xmin - cfg.margin), x_hi = std::ceil(xmax + cfg.margin);
  const double y_lo = std::floor(ymin - cfg.margin), y_hi = std::ceil(ymax + cfg.margin);
  const double pixels = (x_hi - x_lo + 1.0) * (y_hi - y_lo + 1.0);
  const double samples = pixels * cfg.resolution * cfg.resolution;
  if (!(samples <= static_cast<double>(cfg.max_samples))) {
    throw BudgetError(fmt::format("PIoU lattice needs {:.0f} samples, budget is {}", samples, cfg.max_samples));
  }
  PixelRegion region;
  region.x0 = static_cast<std::int64_t>(x_lo);
  region.y0 = static_cast<std::int64_t>(y_lo);
  region.nx = static_cast<std::int64_t>(x_hi - x_lo) + 1;
  region.ny = static_cast<std::int64_t>(y_hi - y_lo) + 1;
  region.resolution = cfg.resolution;
  return region;
}

LocalDistances local_distances(Point p, const Obb& b) {
  const BoxFrame f(b);
  return {std::abs(f.along_w(p.x, p.y)), std::abs(f.along_h(p.x, p.y))};
}

int delta(Point p, const Obb& b) {
  const LocalDistances d = local_distances(p, b);
  return (d.d_w <= b.w / 2.0 && d.d_h <= b.h / 2.0) ? 1 : 0;
}

double kernel(double d, double half_extent, double k) {
  // 1 - 1/(1 + e^{-t}) == 1/(1 + e^{t}); the latter cannot cancel.
  return 1.0 / (1.0 + std::exp(k * (d - half_extent)));
}

double contribution(Point p, const Obb& b, const PiouConfig& cfg) {
  const LocalDistances d = local_distances(p, b);
  return kernel(d.d_w, b.w / 2.0, cfg.k) * kernel(d.d_h, b.h / 2.0, cfg.k);
}

PiouTerms piou_terms(const Obb& b, const Obb& g, const PixelRegion& region, const PiouConfig& cfg) {
  cfg.validate();
  check_box(b);
  check_box(g);
  const BoxFrame fb(b), fg(g);
  const double k = cfg.k;
  CompensatedSum inter;
  walk_lattice(region, [&](double px, double py) {
    const double mb = kernel(std::abs(fb.along_w(px, py)), fb.half_w, k) *
                      kernel(std::abs(fb.along_h(px, py)), fb.half_h, k);
    const double mg = kernel(std::abs(fg.along_w(px, py)), fg.half_w, k) *
                      kernel(std::abs(fg.along_h(px, py)), fg.half_h, k);
    inter.add(mb * mg);
  });
  PiouTerms t;
  t.intersection = inter.value() * region.weight();
  t.union_area = b.area() + g.area() - t.intersection;
  const double raw = t.union_area > 0.0 ? t.intersection / t.union_area : 0.0;
  t.clamped = !(raw >= cfg.eps && raw <= 1.0);
  t.piou = std::clamp(std::isfinite(raw) ? raw : 0.0, cfg.eps, 1.0);
  return t;
}

double piou(const Obb& b, const Obb& g, const PixelRegion& region, const PiouConfig& cfg) {
  return piou_terms(b, g, region, cfg).piou;
}

double piou(const Obb& b, const Obb& g, const PiouConfig& cfg) { return piou(b, g, pixel_region(b, g, cfg), cfg); }

double piou_loss(const Obb& b, const Obb& g, const PixelRegion& region, const PiouConfig& cfg) {
  return finish_loss(piou(b, g, region, cfg), cfg.loss);
}

double piou_loss(const Obb& b, const Obb& g, const PiouConfig& cfg) {
  return piou_loss(b, g, pixel_region(b, g, cfg), cfg);
}

LossAndGrad piou_loss_and_grad(const Obb& b, const Obb& g, const PixelRegion& region, const PiouConfig& cfg) {
  cfg.validate();
  check_box(b);
  check_box(g);
  const BoxFrame fb(b), fg(g);
  const double k = cfg.k;
  CompensatedSum inter, dx, dy, dw, dh, dt;
  walk_lattice(region, [&](double px, double py) {
    const double mg = kernel(std::abs(fg.along_w(px, py)), fg.half_w, k) *
                      kernel(std::abs(fg.along_h(px, py)), fg.half_h, k);
    const double u = fb.along_w(px, py);
    const double v = fb.along_h(px, py);
    const double kw = kernel(std::abs(u), fb.half_w, k);
    const double kh = kernel(std::abs(v), fb.half_h, k);
    // a = -dK/dd = dK/ds for the logistic kernel.
    const double aw = k * kw * (1.0 - kw);
    const double ah = k * kh * (1.0 - kh);
    const double su = sign(u), sv = sign(v);
    inter.add(kw * kh * mg);
    dx.add(mg * (kh * aw * su * fb.s + kw * ah * sv * fb.c));
    dy.add(mg * (kh * aw * su * fb.c - kw * ah * sv * fb.s));
    dw.add(mg * kh * aw * 0.5);
    dh.add(mg * kw * ah * 0.5);
    dt.add(mg * (kw * ah * sv * u - kh * aw * su * v));
  });

  const double wt = region.weight();
  const double i = inter.value() * wt;
  const double uni = b.area() + g.area() - i;
  const double raw = uni > 0.0 ? i / uni : 0.0;
  const bool clamped = !(raw >= cfg.eps && raw <= 1.0) || !std::isfinite(raw);
  const double p = std::clamp(std::isfinite(raw) ? raw : 0.0, cfg.eps, 1.0);

  LossAndGrad out;
  out.loss = finish_loss(p, cfg.loss);
  if (clamped) return out;

  // dP = (dI * U - I * dU) / U^2 with dU = dA_b - dI.
  const double dloss_dp = cfg.loss == PiouLossKind::kNegLog ? -1.0 / p : -1.0;
  auto chain = [&](double d_inter, double d_area) {
    const double d_union = d_area - d_inter;
    return dloss_dp * (d_inter * uni - i * d_union) / (uni * uni);
  };
  out.grad.d_x = chain(dx.value() * wt, 0.0);
  out.grad.d_y = chain(dy.value() * wt, 0.0);
  out.grad.d_w = chain(dw.value() * wt, b.h);
  out.grad.d_h = chain(dh.value() * wt, b.w);
  out.grad.d_theta = chain(dt.value() * wt, 0.0);
  return out;
}

LossAndGrad piou_loss_and_grad(const Obb& b, const Obb& g, const PiouConfig& cfg) {
  return piou_loss_and_grad(b, g, pixel_region(b, g, cfg), cfg);
}

Grad5 piou_grad(const Obb& b, const Obb& g, const PiouConfig& cfg) { return piou_loss_and_grad(b, g, cfg).grad; }

}  // namespace obbkit
