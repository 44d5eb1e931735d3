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

#include "obbkit/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "obbkit/error.hpp"
#include "obbkit/polyclip.hpp"

namespace obbkit {

namespace {

std::vector<std::size_t> by_score(std::span<const Detection> dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  return order;
}

void check_class(int class_id, int num_classes, const char* what) {
  if (class_id < 0 || class_id >= num_classes) {
    throw ConfigError(fmt::format("{} has unknown class id {} (expected 0..{})", what, class_id, num_classes - 1));
  }
}

// Indices of surviving detections, score descending.
std::vector<std::size_t> nms_keep(std::span<const Detection> dets, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError(fmt::format("NMS threshold must lie in [0, 1], got {}", tau));
  std::vector<std::size_t> kept;
  for (std::size_t idx : by_score(dets)) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(),
                                        [&](std::size_t k) { return iou_exact(dets[k].box, dets[idx].box) >= tau; });
    if (!suppressed) kept.push_back(idx);
  }
  return kept;
}

}  // namespace

std::vector<Detection> rotated_nms(std::span<const Detection> dets, double tau) {
  std::vector<Detection> kept;
  for (std::size_t i : nms_keep(dets, tau)) kept.push_back(dets[i]);
  return kept;
}

std::vector<Detection> batched_rotated_nms(std::span<const Detection> dets, double tau) {
  std::map<std::pair<std::string, int>, std::vector<Detection>> groups;
  std::map<std::pair<std::string, int>, std::vector<std::size_t>> origin;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const auto key = std::make_pair(dets[i].image_id, dets[i].class_id);
    groups[key].push_back(dets[i]);
    origin[key].push_back(i);
  }
  std::vector<std::size_t> survivors;
  for (const auto& [key, group] : groups) {
    for (std::size_t local : nms_keep(group, tau)) survivors.push_back(origin[key][local]);
  }
  std::sort(survivors.begin(), survivors.end());
  std::stable_sort(survivors.begin(), survivors.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  std::vector<Detection> out;
  out.reserve(survivors.size());
  for (std::size_t i : survivors) out.push_back(dets[i]);
  return out;
}

std::vector<std::size_t> ranking_order(std::span<const Detection> dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dets[a].score != dets[b].score) return dets[a].score > dets[b].score;
    if (dets[a].image_id != dets[b].image_id) return dets[a].image_id < dets[b].image_id;
    return a < b;
  });
  return order;
}

std::vector<MatchLabel> match_detections(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                                         double iou_thr, int num_classes) {
  if (!(iou_thr > 0.0 && iou_thr < 1.0)) throw ConfigError(fmt::format("IoU threshold must lie in (0, 1), got {}", iou_thr));
  if (num_classes < 1) throw ConfigError("num_classes must be positive");
  for (const Detection& d : dets) {
    check_class(d.class_id, num_classes, "detection");
    if (!std::isfinite(d.score)) throw ConfigError("detection score is not finite");
  }
  for (const GroundTruth& g : gts) check_class(g.class_id, num_classes, "ground truth");

  std::map<std::pair<std::string, int>, std::vector<std::size_t>> gt_index;
  for (std::size_t i = 0; i < gts.size(); ++i) gt_index[{gts[i].image_id, gts[i].class_id}].push_back(i);
  std::vector<char> taken(gts.size(), 0);

  std::vector<MatchLabel> labels(dets.size(), MatchLabel::kFalsePositive);
  for (std::size_t di : ranking_order(dets)) {
    const Detection& d = dets[di];
    const auto it = gt_index.find({d.image_id, d.class_id});
    if (it == gt_index.end()) continue;
    // Difficult ground truths are never consumed.
    double best = iou_thr;
    std::ptrdiff_t best_gt = -1;
    for (std::size_t gi : it->second) {
      if (taken[gi]) continue;
      const double ov = iou_exact(d.box, gts[gi].box);
      if (ov >= best && (best_gt < 0 || ov > best)) {
        best = ov;
        best_gt = static_cast<std::ptrdiff_t>(gi);
      }
    }
    if (best_gt < 0) continue;
    if (gts[best_gt].difficult) {
      labels[di] = MatchLabel::kIgnored;
    } else {
      taken[best_gt] = 1;
      labels[di] = MatchLabel::kTruePositive;
    }
  }
  return labels;
}

double voc07_ap(std::span<const MatchLabel> ranked, std::size_t npos) {
  if (npos == 0) return 0.0;
  std::vector<double> recall, precision;
  std::size_t tp = 0, fp = 0;
  for (MatchLabel l : ranked) {
    if (l == MatchLabel::kIgnored) continue;
    (l == MatchLabel::kTruePositive ? tp : fp) += 1;
    recall.push_back(static_cast<double>(tp) / static_cast<double>(npos));
    precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
  }
  double ap = 0.0;
  for (int i = 0; i <= 10; ++i) {
    const double t = i / 10.0;
    double p = 0.0;
    for (std::size_t j = 0; j < recall.size(); ++j) {
      if (recall[j] >= t) p = std::max(p, precision[j]);
    }
    ap += p / 11.0;
  }
  return std::clamp(ap, 0.0, 1.0);
}

EvalReport evaluate(std::span<const Detection> dets, std::span<const GroundTruth> gts, double iou_thr,
                    int num_classes) {
  const std::vector<MatchLabel> labels = match_detections(dets, gts, iou_thr, num_classes);
  const std::vector<std::size_t> order = ranking_order(dets);

  EvalReport report;
  report.iou_threshold = iou_thr;
  report.classes.resize(static_cast<std::size_t>(num_classes));
  for (int c = 0; c < num_classes; ++c) report.classes[c].class_id = c;
  for (const GroundTruth& g : gts) {
    if (!g.difficult) ++report.classes[g.class_id].npos;
  }

  std::vector<std::vector<MatchLabel>> ranked(static_cast<std::size_t>(num_classes));
  for (std::size_t di : order) {
    ClassResult& cr = report.classes[dets[di].class_id];
    if (labels[di] == MatchLabel::kTruePositive) ++cr.tp;
    if (labels[di] == MatchLabel::kFalsePositive) ++cr.fp;
    ranked[dets[di].class_id].push_back(labels[di]);
  }

  double sum = 0.0;
  std::size_t counted = 0;
  for (ClassResult& cr : report.classes) {
    cr.ap = voc07_ap(ranked[cr.class_id], cr.npos);
    if (cr.npos > 0) {
      sum += cr.ap;
      ++counted;
    }
  }
  report.map = counted > 0 ? sum / static_cast<double>(counted) : 0.0;
  return report;
}

}  // namespace obbkit
