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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "obbkit/error.hpp"
#include "obbkit/fitkit.hpp"
#include "obbkit/polyclip.hpp"
#include "obbkit/random.hpp"
#include "support/oracles.hpp"

namespace obbkit {
namespace {

TEST(SmoothL1, Formula) {
  const Obb g{1, 2, 30, 10, 0.5};
  EXPECT_EQ(smooth_l1(g, g).value, 0.0);
  EXPECT_DOUBLE_EQ(smooth_l1({1.5, 2, 30, 10, 0.5}, g).value, 0.125);
  EXPECT_DOUBLE_EQ(smooth_l1({1, 5, 30, 10, 0.5}, g).value, 2.5);
  EXPECT_DOUBLE_EQ(smooth_l1({1, 2, 30, 10, 0.0}, g, 0.5).value, 0.25);
  EXPECT_THROW(smooth_l1(g, g, 0.0), ConfigError);
}

TEST(SmoothL1, GradientMatchesFiniteDifferencesAwayFromKink) {
  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    const Obb g = testing::random_canonical_box(rng, 5, 50, 10);
    const Obb b = testing::random_canonical_box(rng, 5, 50, 10);
    const double beta = rng.uniform(0.2, 3.0);
    const Grad5 analytic = smooth_l1(b, g, beta).grad;
    // Smooth-L1 is piecewise quadratic/linear, so central differences are
    // exact up to rounding once the kink at |d| = beta is out of reach.
    const Grad5 numeric = testing::finite_difference([&](const Obb& o) { return smooth_l1(o, g, beta).value; }, b, 1e-6);
    for (int p = 0; p < 5; ++p) {
      const double d = testing::component(Grad5{b.x - g.x, b.y - g.y, b.w - g.w, b.h - g.h, b.theta - g.theta}, p);
      if (std::abs(std::abs(d) - beta) < 1e-4) continue;
      EXPECT_NEAR(testing::component(analytic, p), testing::component(numeric, p), 1e-6);
    }
  }
}

TEST(SmoothL1, AngleHasNoWrapAround) {
  const Obb g{0, 0, 20, 10, 0};
  const Obb p = canonicalize(0, 0, 20, 10, deg_to_rad(179));
  EXPECT_NEAR(smooth_l1(p, g).value, deg_to_rad(179) - 0.5, 1e-12);
}

TEST(Fit, ConvergedAtStepZeroWhenInitIsTarget) {
  const Obb g = canonicalize(0, 0, 40, 20, deg_to_rad(30));
  FitConfig cfg;
  const FitTrace t = fit(g, g, cfg);
  ASSERT_EQ(t.steps.size(), 1u);
  EXPECT_TRUE(t.converged);
  EXPECT_NEAR(t.final_iou, 1.0, 1e-12);
  EXPECT_EQ(t.steps[0].step, 0);
}

TEST(Fit, PiouRecoversRotatedNearSquare) {
  const Obb g{0, 0, 20.4, 20, 0};
  FitConfig cfg;
  const FitTrace t = fit(g, canonicalize(0, 0, 20.4, 20, deg_to_rad(41)), cfg);
  EXPECT_TRUE(t.converged);
  EXPECT_GE(t.final_iou, 0.9);
  EXPECT_LE(t.steps.size(), static_cast<std::size_t>(cfg.max_steps));
}

TEST(Fit, SmoothL1ConvergesOnUnambiguousTarget) {
  const Obb g{10, -5, 40, 12, 0.6};
  FitConfig cfg;
  cfg.loss = FitLoss::kSmoothL1;
  const FitTrace t = fit(g, Obb{14, -2, 35, 14, 0.9}, cfg);
  EXPECT_TRUE(t.converged);
}

TEST(Fit, AmbiguousEncodingsStallSmoothL1Near45Degrees) {
  const std::vector<Obb> encodings{{0, 0, 20.4, 20, 0}, {0, 0, 20, 20.4, kPi / 2}};
  FitConfig cfg;
  cfg.loss = FitLoss::kSmoothL1;
  const FitTrace t = fit(encodings, canonicalize(0, 0, 20.4, 20, deg_to_rad(45)), cfg);
  EXPECT_FALSE(t.converged);
  EXPECT_LT(t.final_iou, 0.8);
  EXPECT_GT(t.angle_error, deg_to_rad(40));
}

TEST(Fit, DeterministicAndRepresentationIndependent) {
  const Obb g{0, 0, 30, 14, 0.2};
  FitConfig cfg;
  cfg.max_steps = 60;
  cfg.seed = 5;
  cfg.jitter_translation = 1.0;
  cfg.jitter_angle = 0.1;
  const FitTrace a = fit(g, Obb{2, 1, 28, 16, 0.7}, cfg);
  const FitTrace b = fit(g, Obb{2, 1, 28, 16, 0.7}, cfg);
  const FitTrace c = fit(g, Obb{2, 1, 16, 28, 0.7 + kPi / 2}, cfg);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  ASSERT_EQ(a.steps.size(), c.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    EXPECT_EQ(a.steps[i].box, b.steps[i].box);
    EXPECT_EQ(a.steps[i].loss, b.steps[i].loss);
    // theta + pi/2 is itself rounded, so the swapped encoding agrees to
    // rounding rather than bit for bit.
    const Obb& p = a.steps[i].box;
    const Obb& q = c.steps[i].box;
    EXPECT_NEAR(p.x, q.x, 1e-9);
    EXPECT_NEAR(p.y, q.y, 1e-9);
    EXPECT_NEAR(p.w, q.w, 1e-9);
    EXPECT_NEAR(p.h, q.h, 1e-9);
    EXPECT_NEAR(p.theta, q.theta, 1e-9);
    EXPECT_NEAR(a.steps[i].loss, c.steps[i].loss, 1e-9);
  }
}

TEST(Fit, PiouLossNeverIncreasesAlongAcceptedSteps) {
  Rng rng(41);
  for (int seed = 0; seed < 20; ++seed) {
    const Obb g = testing::random_canonical_box(rng, 15, 40, 0);
    Obb init = g;
    init = canonicalize(g.x + rng.uniform(-5, 5), g.y + rng.uniform(-5, 5), g.w * rng.uniform(0.7, 1.3),
                        g.h * rng.uniform(0.7, 1.3), g.theta + rng.uniform(-0.8, 0.8));
    FitConfig cfg;
    cfg.max_steps = 80;
    cfg.steps = {0.1, 0.05, 0.002};
    const FitTrace t = fit(g, init, cfg);
    for (std::size_t i = 1; i < t.steps.size(); ++i) {
      EXPECT_LE(t.steps[i].loss, t.steps[i - 1].loss + cfg.descent_tolerance) << "seed " << seed << " step " << i;
    }
  }
}

TEST(Fit, FlagsSaturatedStart) {
  FitConfig cfg;
  cfg.max_steps = 3;
  const FitTrace t = fit(Obb{0, 0, 10, 5, 0}, Obb{60, 0, 10, 5, 0}, cfg);
  EXPECT_TRUE(t.saturated);
  EXPECT_FALSE(t.converged);
}

TEST(Fit, RejectsBadConfig) {
  FitConfig cfg;
  cfg.max_steps = 0;
  EXPECT_THROW(fit(Obb{0, 0, 10, 5, 0}, Obb{0, 0, 10, 5, 0}, cfg), ConfigError);
  cfg = FitConfig{};
  cfg.steps.angle = 0;
  EXPECT_THROW(fit(Obb{0, 0, 10, 5, 0}, Obb{0, 0, 10, 5, 0}, cfg), ConfigError);
  EXPECT_THROW(fit(std::span<const Obb>{}, Obb{0, 0, 10, 5, 0}, FitConfig{}), ConfigError);
}

TEST(BoundarySweep, IdentityPointAndHalfTurnPeriodicity) {
  const Obb g = canonicalize(3, 4, 20, 10, deg_to_rad(30));
  std::vector<double> angles;
  for (int d = 0; d < 360; ++d) angles.push_back(deg_to_rad(d));
  const std::vector<SweepRow> rows = boundary_sweep(g, angles);
  ASSERT_EQ(rows.size(), 360u);
  const double at_target = rows[30].piou_loss;
  for (const SweepRow& r : rows) EXPECT_GE(r.piou_loss, at_target - 1e-12);
  EXPECT_EQ(rows[30].smooth_l1, 0.0);
  for (int d = 0; d < 180; ++d) {
    EXPECT_NEAR(rows[d].piou_loss, rows[d + 180].piou_loss, 1e-9) << d;
    EXPECT_NEAR(rows[d].smooth_l1, rows[d + 180].smooth_l1, 1e-9) << d;
  }
}

TEST(BoundarySweep, SmoothL1JumpsAtSeamWhilePiouStaysContinuous) {
  const Obb g{0, 0, 20, 10, 0};
  std::vector<double> angles;
  for (int d = 170; d <= 190; ++d) angles.push_back(deg_to_rad(d));
  const std::vector<SweepRow> rows = boundary_sweep(g, angles);
  double max_piou_jump = 0, max_l1_jump = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    max_piou_jump = std::max(max_piou_jump, std::abs(rows[i].piou_loss - rows[i - 1].piou_loss));
    max_l1_jump = std::max(max_l1_jump, std::abs(rows[i].smooth_l1 - rows[i - 1].smooth_l1));
  }
  EXPECT_LE(max_piou_jump, 0.05);
  EXPECT_GE(max_l1_jump, 1.0);
}

}  // namespace
}  // namespace obbkit
