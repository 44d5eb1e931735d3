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
#include <span>
#include <string>
#include <vector>

#include "obbkit/geom.hpp"

namespace obbkit {

struct Detection {
  std::string image_id;
  int class_id = 0;
  double score = 0.0;
  Obb box;
};

struct GroundTruth {
  std::string image_id;
  int class_id = 0;
  Obb box;
  bool difficult = false;
};

enum class MatchLabel { kTruePositive, kFalsePositive, kIgnored };

struct ClassResult {
  int class_id = 0;
  double ap = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t npos = 0;  // non-difficult ground truths
};

struct EvalReport {
  std::vector<ClassResult> classes;  // one per class id in [0, num_classes)
  double map = 0.0;                  // mean AP over classes with npos > 0
  double iou_threshold = 0.5;
};

/// Greedy rotated NMS on one image and one class. Output is sorted by score
/// descending, ties in input order.
std::vector<Detection> rotated_nms(std::span<const Detection> dets, double tau);

/// rotated_nms applied independently per (image id, class id). Output is
/// sorted by score descending, ties in input order.
std::vector<Detection> batched_rotated_nms(std::span<const Detection> dets, double tau);

/// Evaluation order: score descending, then image id, then input index.
std::vector<std::size_t> ranking_order(std::span<const Detection> dets);

/// VOC matching. Returns one label per detection, in input order.
std::vector<MatchLabel> match_detections(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                                         double iou_thr, int num_classes);

/// VOC2007 11-point AP of a ranked label sequence (ignored entries skipped).
double voc07_ap(std::span<const MatchLabel> ranked, std::size_t npos);

EvalReport evaluate(std::span<const Detection> dets, std::span<const GroundTruth> gts, double iou_thr,
                    int num_classes);

}  // namespace obbkit
