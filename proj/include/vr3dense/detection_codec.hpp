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

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "vr3dense/box_geometry.hpp"
#include "vr3dense/voxel_grid.hpp"

namespace vr3dense {

/// Per-cell prediction target over a fixed 16x16 bird's-eye-view partition of
/// the ROI. Each cell carries (confidence, x, y, z, length, width, height,
/// cos yaw, sin yaw, class scores...). Cells predict at most one object.
class TargetTensor {
 public:
  static constexpr int kGridCells = 16;
  static constexpr int kConf = 0;
  static constexpr int kX = 1;
  static constexpr int kY = 2;
  static constexpr int kZ = 3;
  static constexpr int kLength = 4;
  static constexpr int kWidth = 5;
  static constexpr int kHeight = 6;
  static constexpr int kCos = 7;
  static constexpr int kSin = 8;
  static constexpr int kClassBase = 9;

  TargetTensor() = default;
  explicit TargetTensor(int class_count);

  int class_count() const { return class_count_; }
  int channels() const { return kClassBase + class_count_; }
  Eigen::Index size() const { return data_.size(); }

  double at(int ix, int iy, int channel) const { return data_[flat(ix, iy, channel)]; }
  double& at(int ix, int iy, int channel) { return data_[flat(ix, iy, channel)]; }

  Eigen::Index flat(int ix, int iy, int channel) const {
    return (static_cast<Eigen::Index>(ix) * kGridCells + iy) * channels() + channel;
  }

  Eigen::VectorXd& data() { return data_; }
  const Eigen::VectorXd& data() const { return data_; }

  bool same_shape(const TargetTensor& other) const { return class_count_ == other.class_count_; }

 private:
  int class_count_ = 0;
  Eigen::VectorXd data_;
};

struct Detection {
  OrientedBox3D box;
  double confidence = 0.0;
  int class_id = 0;
  Eigen::VectorXd class_scores;
};

/// Assigns each box to the cell containing its BEV center (boxes whose BEV
/// center falls outside the ROI are dropped). An occupied cell stores
/// confidence 1, absolute pose values, cos/sin of yaw, and a one-hot class.
/// When two boxes land in one cell the larger BEV footprint wins.
TargetTensor encode_targets(const std::vector<std::pair<OrientedBox3D, int>>& boxes,
                            const RoiConfig& roi, int class_count);

/// Every cell at or above the confidence threshold becomes a Detection with
/// yaw = atan2(sin, cos) and class = argmax (ties to the lowest index).
std::vector<Detection> decode_predictions(const TargetTensor& tensor, const RoiConfig& roi,
                                          double conf_threshold);

/// Greedy class-aware non-maximum suppression in the bird's-eye view: sort by
/// confidence descending (stable), keep a detection iff its BEV IoU with every
/// kept same-class detection is below the threshold.
std::vector<Detection> nms_bev(const std::vector<Detection>& detections, double iou_threshold);

/// Tensor file layout: four little-endian int32 (grid, grid, channels,
/// class count) followed by grid*grid*channels little-endian float64 in
/// (ix, iy, channel) row-major order.
std::vector<std::uint8_t> write_target_tensor(const TargetTensor& tensor);
TargetTensor read_target_tensor(const std::vector<std::uint8_t>& bytes);

/// Detections as KITTI label lines with the confidence in the 16th field,
/// one line per detection, in input order.
std::string detections_to_label_lines(const std::vector<Detection>& detections,
                                      const Calibration& calib,
                                      const std::vector<std::string>& class_names,
                                      Index image_height = 0, Index image_width = 0);

}  // namespace vr3dense
