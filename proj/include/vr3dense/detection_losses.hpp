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

#include <utility>
#include <vector>

#include "vr3dense/detection_codec.hpp"

namespace vr3dense {

struct DetLossWeights {
  double lambda_conf = 1.0;
  double lambda_pose = 1.0;
  double lambda_class = 1.0;
  double lambda_giou = 1.0;
  double epsilon = 1e-6;
};

/// Detection loss terms plus the gradient of the weighted total with respect
/// to every prediction tensor entry (same flat layout as TargetTensor::data).
struct DetLossReport {
  double conf = 0.0;
  double pose = 0.0;
  double classification = 0.0;
  double giou = 0.0;
  double total = 0.0;
  Eigen::VectorXd gradient;
};

/// Summed squared pose-channel error over cells occupied in the ground truth,
/// divided by (true object count + epsilon).
double loss_pose(const TargetTensor& pred, const TargetTensor& gt, double epsilon);

/// Squared confidence error, occupied and empty cells normalized separately by
/// their own population counts (+ epsilon).
double loss_conf(const TargetTensor& pred, const TargetTensor& gt, double epsilon);

/// Mean softmax cross-entropy of the class channels over occupied cells.
/// Predictions are raw logits; the log is floored at 1e-12.
double loss_class(const TargetTensor& pred, const TargetTensor& gt);

/// Mean of (giou_3d(pred, gt) - 1)^2 over per-cell box pairs.
double loss_giou(const std::vector<std::pair<OrientedBox3D, OrientedBox3D>>& boxes_by_cell);

/// All four terms, the weighted total, and its gradient. The confidence, pose
/// and class blocks are analytic; the GIoU block is differentiated numerically
/// per occupied cell and folded in.
DetLossReport loss_detection_total(const TargetTensor& pred, const TargetTensor& gt,
                                   const DetLossWeights& weights);

}  // namespace vr3dense
