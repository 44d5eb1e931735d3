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

#include "obbkit/fitkit.hpp"

#include <array>
#include <cmath>

#include <fmt/format.h>

#include "obbkit/error.hpp"
#include "obbkit/polyclip.hpp"
#include "obbkit/random.hpp"

namespace obbkit {

namespace {

struct HuberTerm {
  double value;
  double slope;
};

HuberTerm huber(double d, double beta) {
  if (std::abs(d) < beta) return {0.5 * d * d / beta, d / beta};
  return {std::abs(d) - 0.5 * beta, d > 0.0 ? 1.0 : -1.0};
}

bool valid_extents(const Obb& b) {
  return std::isfinite(b.x) && std::isfinite(b.y) && std::isfinite(b.w) && std::isfinite(b.h) &&
         std::isfinite(b.theta) && b.w > 0.0 && b.h > 0.0;
}

// Moves each parameter group a fixed length along its negative gradient
// direction; a group with zero gradient stays put.
Obb descend(const Obb& b, const Grad5& g, const StepSizes& steps, double scale) {
  auto unit = [](double a, double c) {
    const double n = std::hypot(a, c);
    return n > 0.0 ? std::pair{a / n, c / n} : std::pair{0.0, 0.0};
  };
  const auto [tx, ty] = unit(g.d_x, g.d_y);
  const auto [ew, eh] = unit(g.d_w, g.d_h);
  const double at = g.d_theta > 0.0 ? 1.0 : (g.d_theta < 0.0 ? -1.0 : 0.0);
  return {b.x - scale * steps.translation * tx, b.y - scale * steps.translation * ty,
          b.w - scale * steps.extent * ew, b.h - scale * steps.extent * eh, b.theta - scale * steps.angle * at};
}

LossAndGrad evaluate_loss(const Obb& state, const Obb& target, const FitConfig& cfg) {
  if (cfg.loss == FitLoss::kPiou) return piou_loss_and_grad(state, target, cfg.piou);
  const SmoothL1Result r = smooth_l1(state, target, cfg.beta);
  return {r.value, r.grad};
}

}  // namespace

SmoothL1Result smooth_l1(const Obb& b, const Obb& g, double beta) {
  if (!(beta > 0.0)) throw ConfigError(fmt::format("beta must be positive, got {}", beta));
  const HuberTerm tx = huber(b.x - g.x, beta);
  const HuberTerm ty = huber(b.y - g.y, beta);
  const HuberTerm tw = huber(b.w - g.w, beta);
  const HuberTerm th = huber(b.h - g.h, beta);
  const HuberTerm tt = huber(b.theta - g.theta, beta);
  return {tx.value + ty.value + tw.value + th.value + tt.value, {tx.slope, ty.slope, tw.slope, th.slope, tt.slope}};
}

void FitConfig::validate() const {
  if (!(steps.translation > 0.0) || !(steps.extent > 0.0) || !(steps.angle > 0.0)) {
    throw ConfigError("step sizes must be positive");
  }
  if (max_steps < 1) throw ConfigError(fmt::format("max_steps must be >= 1, got {}", max_steps));
  if (!(iou_target > 0.0 && iou_target <= 1.0)) throw ConfigError("iou_target must lie in (0, 1]");
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
  if (!(jitter_translation >= 0.0) || !(jitter_angle >= 0.0)) throw ConfigError("jitter must be non-negative");
  if (!(descent_tolerance >= 0.0) || max_backtracks < 0) throw ConfigError("invalid line-search settings");
  piou.validate();
}

FitTrace fit(const Obb& g, const Obb& init, const FitConfig& cfg) {
  const std::array<Obb, 1> encodings{g};
  return fit(encodings, init, cfg);
}

FitTrace fit(std::span<const Obb> encodings, const Obb& init, const FitConfig& cfg) {
  cfg.validate();
  if (encodings.empty()) throw ConfigError("fit needs at least one target encoding");
  std::vector<Obb> targets;
  targets.reserve(encodings.size());
  for (const Obb& e : encodings) {
    // Validates every encoding, canonical or not.
    const Obb c = canonicalize(e);
    targets.push_back(cfg.loss == FitLoss::kPiou ? c : e);
  }
  const Obb reference = canonicalize(encodings.front());

  Obb state = canonicalize(init);
  if (cfg.jitter_translation > 0.0 || cfg.jitter_angle > 0.0) {
    Rng rng(cfg.seed);
    const double jx = rng.uniform(-1.0, 1.0) * cfg.jitter_translation;
    const double jy = rng.uniform(-1.0, 1.0) * cfg.jitter_translation;
    const double jt = rng.uniform(-1.0, 1.0) * cfg.jitter_angle;
    state = canonicalize(state.x + jx, state.y + jy, state.w, state.h, state.theta + jt);
  }

  FitTrace trace;
  trace.steps.reserve(static_cast<std::size_t>(cfg.max_steps));
  LossAndGrad current = evaluate_loss(state, targets[0], cfg);
  if (cfg.loss == FitLoss::kPiou && iou_exact(state, reference) < 0.01) trace.saturated = true;

  for (int step = 0; step < cfg.max_steps; ++step) {
    const Obb shown = canonicalize(state);
    const double iou = iou_exact(shown, reference);
    trace.steps.push_back({step, shown, current.loss, iou});
    if (iou >= cfg.iou_target) {
      trace.converged = true;
      break;
    }
    if (step + 1 == cfg.max_steps) break;

    // Backtrack on the loss of the target this gradient was taken against.
    const Obb& target = targets[static_cast<std::size_t>(step) % targets.size()];
    bool accepted = false;
    double scale = 1.0;
    for (int attempt = 0; attempt <= cfg.max_backtracks; ++attempt, scale *= 0.5) {
      Obb candidate = descend(state, current.grad, cfg.steps, scale);
      if (!valid_extents(candidate)) continue;
      // Smooth-L1 regresses raw parameters; PIoU works on the canonical box.
      if (cfg.loss == FitLoss::kPiou) candidate = canonicalize(candidate);
      LossAndGrad trial = evaluate_loss(candidate, target, cfg);
      if (trial.loss > current.loss + cfg.descent_tolerance) continue;
      state = candidate;
      const Obb& next_target = targets[static_cast<std::size_t>(step + 1) % targets.size()];
      current = (&next_target == &target) ? std::move(trial) : evaluate_loss(state, next_target, cfg);
      accepted = true;
      break;
    }
    if (!accepted) {
      trace.stalled = true;
      break;
    }
  }

  const FitStep& last = trace.steps.back();
  trace.final_iou = last.iou;
  trace.angle_error = angle_distance_mod_pi(last.box.theta, reference.theta);
  return trace;
}

std::vector<SweepRow> boundary_sweep(const Obb& g, std::span<const double> angles, const PiouConfig& cfg,
                                     double beta) {
  const Obb target = canonicalize(g);
  std::vector<SweepRow> rows;
  rows.reserve(angles.size());
  for (double angle : angles) {
    const Obb pred = canonicalize(target.x, target.y, target.w, target.h, angle);
    rows.push_back({angle, piou_loss(pred, target, cfg), smooth_l1(pred, target, beta).value});
  }
  return rows;
}

}  // namespace obbkit
