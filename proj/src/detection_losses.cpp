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

#include "vr3dense/detection_losses.hpp"

#include <cmath>

namespace vr3dense {

namespace {

constexpr double kLogFloor = 1e-12;
constexpr double kSizeFloor = 1e-6;
constexpr double kGiouDiffStep = 1e-5;

bool occupied(const TargetTensor& gt, int ix, int iy) {
  return gt.at(ix, iy, TargetTensor::kConf) > 0.5;
}

int count_occupied(const TargetTensor& gt) {
  int n = 0;
  for (int ix = 0; ix < TargetTensor::kGridCells; ++ix) {
    for (int iy = 0; iy < TargetTensor::kGridCells; ++iy) {
      n += occupied(gt, ix, iy) ? 1 : 0;
    }
  }
  return n;
}

void check_shapes(const TargetTensor& pred, const TargetTensor& gt, const char* who) {
  if (!pred.same_shape(gt)) {
    throw ParameterError(std::string(who) + ": prediction/ground-truth shape mismatch");
  }
}

/// Box from a cell's pose channels. Sizes are floored so arbitrary prediction
/// tensors stay evaluable under GIoU.
OrientedBox3D cell_box(const Eigen::VectorXd& pose8) {
  OrientedBox3D box;
  box.center = Eigen::Vector3d(pose8[0], pose8[1], pose8[2]);
  box.length = std::max(pose8[3], kSizeFloor);
  box.width = std::max(pose8[4], kSizeFloor);
  box.height = std::max(pose8[5], kSizeFloor);
  box.yaw = std::atan2(pose8[7], pose8[6]);
  return box;
}

Eigen::VectorXd cell_pose(const TargetTensor& t, int ix, int iy) {
  Eigen::VectorXd pose(8);
  for (int k = 0; k < 8; ++k) {
    pose[k] = t.at(ix, iy, TargetTensor::kX + k);
  }
  return pose;
}

Eigen::VectorXd cell_softmax(const TargetTensor& t, int ix, int iy) {
  Eigen::VectorXd logits(t.class_count());
  for (int c = 0; c < t.class_count(); ++c) {
    logits[c] = t.at(ix, iy, TargetTensor::kClassBase + c);
  }
  const double peak = logits.maxCoeff();
  Eigen::VectorXd exps = (logits.array() - peak).exp();
  return exps / exps.sum();
}

}  // namespace

double loss_pose(const TargetTensor& pred, const TargetTensor& gt, double epsilon) {
  check_shapes(pred, gt, "loss_pose");
  const int n_true = count_occupied(gt);
  double sum = 0.0;
  for (int ix = 0; ix < TargetTensor::kGridCells; ++ix) {
    for (int iy = 0; iy < TargetTensor::kGridCells; ++iy) {
      if (!occupied(gt, ix, iy)) {
        continue;
      }
      for (int k = 0; k < 8; ++k) {
        const int ch = TargetTensor::kX + k;
        const double d = pred.at(ix, iy, ch) - gt.at(ix, iy, ch);
        sum += d * d;
      }
    }
  }
  return sum / (n_true + epsilon);
}

double loss_conf(const TargetTensor& pred, const TargetTensor& gt, double epsilon) {
  check_shapes(pred, gt, "loss_conf");
  const int n_true = count_occupied(gt);
  const int n_false = TargetTensor::kGridCells * TargetTensor::kGridCells - n_true;
  double sum_true = 0.0;
  double sum_false = 0.0;
  for (int ix = 0; ix < TargetTensor::kGridCells; ++ix) {
    for (int iy = 0; iy < TargetTensor::kGridCells; ++iy) {
      const double d = pred.at(ix, iy, TargetTensor::kConf) - gt.at(ix, iy, TargetTensor::kConf);
      (occupied(gt, ix, iy) ? sum_true : sum_false) += d * d;
    }
  }
  return sum_true / (n_true + epsilon) + sum_false / (n_false + epsilon);
}

double loss_class(const TargetTensor& pred, const TargetTensor& gt) {
  check_shapes(pred, gt, "loss_class");
  const int n_true = count_occupied(gt);
  if (n_true == 0) {
    return 0.0;
  }
  double sum = 0.0;
  for (int ix = 0; ix < TargetTensor::kGridCells; ++ix) {
    for (int iy = 0; iy < TargetTensor::kGridCells; ++iy) {
      if (!occupied(gt, ix, iy)) {
        continue;
      }
      const Eigen::VectorXd probs = cell_softmax(pred, ix, iy);
      for (int c = 0; c < gt.class_count(); ++c) {
        const double y = gt.at(ix, iy, TargetTensor::kClassBase + c);
        if (y != 0.0) {
          sum -= y * std::log(std::max(probs[c], kLogFloor));
        }
      }
    }
  }
  return sum / n_true;
}

double loss_giou(const std::vector<std::pair<OrientedBox3D, OrientedBox3D>>& boxes_by_cell) {
  if (boxes_by_cell.empty()) {
    return 0.0;
  }
  double sum = 0.0;
  for (const auto& [pred, gt] : boxes_by_cell) {
    const double g = giou_3d(pred, gt);
    sum += (g - 1.0) * (g - 1.0);
  }
  return sum / static_cast<double>(boxes_by_cell.size());
}

DetLossReport loss_detection_total(const TargetTensor& pred, const TargetTensor& gt,
                                   const DetLossWeights& weights) {
  check_shapes(pred, gt, "loss_detection_total");
  if (!(weights.epsilon > 0.0)) {
    throw ParameterError("loss_detection_total: epsilon must be positive");
  }

  DetLossReport report;
  report.gradient = Eigen::VectorXd::Zero(pred.size());

  const int n_true = count_occupied(gt);
  const int n_false = TargetTensor::kGridCells * TargetTensor::kGridCells - n_true;
  const double true_norm = n_true + weights.epsilon;
  const double false_norm = n_false + weights.epsilon;

  std::vector<std::pair<OrientedBox3D, OrientedBox3D>> boxes_by_cell;

  for (int ix = 0; ix < TargetTensor::kGridCells; ++ix) {
    for (int iy = 0; iy < TargetTensor::kGridCells; ++iy) {
      const bool occ = occupied(gt, ix, iy);
      const double conf_diff =
          pred.at(ix, iy, TargetTensor::kConf) - gt.at(ix, iy, TargetTensor::kConf);
      const double conf_norm = occ ? true_norm : false_norm;
      report.conf += conf_diff * conf_diff / conf_norm;
      report.gradient[pred.flat(ix, iy, TargetTensor::kConf)] +=
          weights.lambda_conf * 2.0 * conf_diff / conf_norm;
      if (!occ) {
        continue;
      }

      for (int k = 0; k < 8; ++k) {
        const int ch = TargetTensor::kX + k;
        const double d = pred.at(ix, iy, ch) - gt.at(ix, iy, ch);
        report.pose += d * d / true_norm;
        report.gradient[pred.flat(ix, iy, ch)] += weights.lambda_pose * 2.0 * d / true_norm;
      }

      const Eigen::VectorXd probs = cell_softmax(pred, ix, iy);
      for (int c = 0; c < gt.class_count(); ++c) {
        const double y = gt.at(ix, iy, TargetTensor::kClassBase + c);
        if (y != 0.0) {
          report.classification -= y * std::log(std::max(probs[c], kLogFloor)) / n_true;
        }
        report.gradient[pred.flat(ix, iy, TargetTensor::kClassBase + c)] +=
            weights.lambda_class * (probs[c] - y) / n_true;
      }

      boxes_by_cell.emplace_back(cell_box(cell_pose(pred, ix, iy)), cell_box(cell_pose(gt, ix, iy)));
    }
  }

  // GIoU term: value is exact; the gradient block is a per-cell central
  // difference over the eight pose channels.
  if (n_true > 0) {
    int cell = 0;
    for (int ix = 0; ix < TargetTensor::kGridCells; ++ix) {
      for (int iy = 0; iy < TargetTensor::kGridCells; ++iy) {
        if (!occupied(gt, ix, iy)) {
          continue;
        }
        const OrientedBox3D& gt_box = boxes_by_cell[static_cast<std::size_t>(cell)].second;
        Eigen::VectorXd pose = cell_pose(pred, ix, iy);
        const double g = giou_3d(boxes_by_cell[static_cast<std::size_t>(cell)].first, gt_box);
        report.giou += (g - 1.0) * (g - 1.0) / n_true;
        if (weights.lambda_giou != 0.0) {
          for (int k = 0; k < 8; ++k) {
            const double saved = pose[k];
            pose[k] = saved + kGiouDiffStep;
            const double g_up = giou_3d(cell_box(pose), gt_box);
            pose[k] = saved - kGiouDiffStep;
            const double g_down = giou_3d(cell_box(pose), gt_box);
            pose[k] = saved;
            const double dg = (g_up - g_down) / (2.0 * kGiouDiffStep);
            report.gradient[pred.flat(ix, iy, TargetTensor::kX + k)] +=
                weights.lambda_giou * 2.0 * (g - 1.0) * dg / n_true;
          }
        }
        ++cell;
      }
    }
  }

  report.total = weights.lambda_conf * report.conf + weights.lambda_pose * report.pose +
                 weights.lambda_class * report.classification + weights.lambda_giou * report.giou;
  if (!std::isfinite(report.total)) {
    throw ParameterError("loss_detection_total: non-finite loss");
  }
  return report;
}

}  // namespace vr3dense
