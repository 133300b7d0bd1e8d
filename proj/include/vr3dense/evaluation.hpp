// Copyright 2026 The VR3Dense Authors
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

#include <array>
#include <vector>

#include "vr3dense/detection_codec.hpp"

namespace vr3dense {

/// Standard dense-depth error metrics plus the three threshold accuracies.
struct DepthMetrics {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
  double rmse_log = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  int sample_count = 0;
};

/// One ground-truth depth sample at an integer pixel.
struct DepthSample {
  int u = 0;
  int v = 0;
  double depth = 0.0;  // meters
};

/// Precision/recall summary sampled at 40 fixed recall positions k/40.
struct PrCurve {
  std::array<double, 40> recall_thresholds{};
  std::array<double, 40> precisions{};
  double ap = 0.0;
};

/// Metrics over the samples whose ground truth lies within [min_depth,
/// max_depth]. Predictions are clamped to [0.1, max_depth] first so the log
/// error stays finite. Throws EvaluationError when no sample qualifies.
DepthMetrics depth_metrics(const DepthMap& pred, const std::vector<DepthSample>& gt,
                           double min_depth, double max_depth);

/// Collects samples from a sparse depth image (zeros mean "no measurement").
std::vector<DepthSample> collect_depth_samples(const ImageGrid& sparse);

/// 40-recall-point average precision: detections sorted by confidence match
/// greedily to the unmatched ground truth with the highest 3D IoU at or above
/// the threshold; interpolated precision at recall r is the maximum raw
/// precision among operating points with recall >= r.
PrCurve average_precision_40(const std::vector<Detection>& detections,
                             const std::vector<OrientedBox3D>& ground_truth, double iou_threshold);

/// Mean AP over the classes that have at least one ground-truth box.
double map_multiclass(const std::vector<Detection>& detections,
                      const std::vector<std::pair<OrientedBox3D, int>>& ground_truth,
                      double iou_threshold);

}  // namespace vr3dense
