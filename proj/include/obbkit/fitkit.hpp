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
#include <span>
#include <vector>

#include "obbkit/geom.hpp"
#include "obbkit/piou.hpp"

namespace obbkit {

struct SmoothL1Result {
  double value = 0.0;
  Grad5 grad;
};

/// Smooth-L1 over the five raw parameter differences (b - g), angle in
/// radians with no wrap-around. The gradient is with respect to b.
SmoothL1Result smooth_l1(const Obb& b, const Obb& g, double beta = 1.0);

enum class FitLoss { kPiou, kSmoothL1 };

/// Per-group step lengths. Each step moves (x, y) by `translation` px and
/// (w, h) by `extent` px along the group's negative gradient direction, and
/// theta by `angle` rad against the sign of its derivative, before
/// backtracking.
struct StepSizes {
  double translation = 0.5;
  double extent = 0.2;
  double angle = 0.01;
};

struct FitConfig {
  FitLoss loss = FitLoss::kPiou;
  StepSizes steps;
  int max_steps = 500;
  double iou_target = 0.9;
  double beta = 1.0;
  // A 2x2 sub-pixel lattice: at one sample per pixel the lattice itself
  // adds shallow local minima that trap the descent.
  PiouConfig piou{.resolution = 2};

  // Seeded perturbation of the (canonicalized) initial box. Zero by default,
  // in which case the seed has no effect.
  std::uint64_t seed = 0;
  double jitter_translation = 0.0;  // px, uniform in [-j, j]
  double jitter_angle = 0.0;        // rad, uniform in [-j, j]

  // Backtracking: a step is accepted once the loss against the step's target
  // rises by at most `descent_tolerance`; the step is halved up to
  // `max_backtracks` times before the fit is declared stalled.
  double descent_tolerance = 1e-9;
  int max_backtracks = 30;

  void validate() const;
};

struct FitStep {
  int step = 0;
  Obb box;  // canonical
  double loss = 0.0;
  double iou = 0.0;  // exact IoU against the canonical target
};

struct FitTrace {
  std::vector<FitStep> steps;
  bool converged = false;
  bool saturated = false;  // PIoU started without usable gradient
  bool stalled = false;    // no acceptable step found
  double final_iou = 0.0;
  double angle_error = 0.0;  // rad, modulo pi
};

/// Gradient descent from `init` toward `g`.
FitTrace fit(const Obb& g, const Obb& init, const FitConfig& cfg);

/// Same, but the regression target cycles through `encodings` step by step
/// (all describing the same rectangle, possibly non-canonically). Exact IoU is
/// measured against the canonical form of the first encoding.
FitTrace fit(std::span<const Obb> encodings, const Obb& init, const FitConfig& cfg);

struct SweepRow {
  double angle = 0.0;  // rad, as requested
  double piou_loss = 0.0;
  double smooth_l1 = 0.0;
};

/// Losses of predictions equal to g with the angle overridden (then
/// canonicalized).
std::vector<SweepRow> boundary_sweep(const Obb& g, std::span<const double> angles, const PiouConfig& cfg = {},
                                     double beta = 1.0);

}  // namespace obbkit
