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

#include "vr3dense/detection_codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

namespace vr3dense {

namespace {

void append_le_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xff));
  }
}

void append_le_f64(std::vector<std::uint8_t>& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  for (int shift = 0; shift < 64; shift += 8) {
    out.push_back(static_cast<std::uint8_t>((bits >> shift) & 0xff));
  }
}

std::uint32_t read_le_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

double read_le_f64(const std::uint8_t* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) {
    bits = (bits << 8) | p[i];
  }
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

/// Cell index of a BEV position under the 16x16 partition of the ROI,
/// or (-1, -1) when outside.
std::pair<int, int> bev_cell(double x, double y, const RoiConfig& roi) {
  if (x < roi.x_min || x >= roi.x_max || y < roi.y_min || y >= roi.y_max) {
    return {-1, -1};
  }
  const double cell_w_x = (roi.x_max - roi.x_min) / TargetTensor::kGridCells;
  const double cell_w_y = (roi.y_max - roi.y_min) / TargetTensor::kGridCells;
  const int ix = std::min(TargetTensor::kGridCells - 1,
                          static_cast<int>(std::floor((x - roi.x_min) / cell_w_x)));
  const int iy = std::min(TargetTensor::kGridCells - 1,
                          static_cast<int>(std::floor((y - roi.y_min) / cell_w_y)));
  return {ix, iy};
}

}  // namespace

TargetTensor::TargetTensor(int class_count) : class_count_(class_count) {
  if (class_count < 1) {
    throw ParameterError("TargetTensor: class count must be at least 1");
  }
  data_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(kGridCells) * kGridCells * channels());
}

TargetTensor encode_targets(const std::vector<std::pair<OrientedBox3D, int>>& boxes,
                            const RoiConfig& roi, int class_count) {
  roi.validate();
  TargetTensor tensor(class_count);
  // Track the footprint that currently owns each cell for the tie rule.
  Eigen::MatrixXd owner_footprint =
      Eigen::MatrixXd::Constant(TargetTensor::kGridCells, TargetTensor::kGridCells, -1.0);

  for (const auto& [box, class_id] : boxes) {
    if (class_id < 0 || class_id >= class_count) {
      throw ParameterError("encode_targets: class id out of range");
    }
    const auto [ix, iy] = bev_cell(box.center.x(), box.center.y(), roi);
    if (ix < 0) {
      continue;
    }
    if (box.bev_area() <= owner_footprint(ix, iy)) {
      continue;
    }
    owner_footprint(ix, iy) = box.bev_area();
    tensor.at(ix, iy, TargetTensor::kConf) = 1.0;
    tensor.at(ix, iy, TargetTensor::kX) = box.center.x();
    tensor.at(ix, iy, TargetTensor::kY) = box.center.y();
    tensor.at(ix, iy, TargetTensor::kZ) = box.center.z();
    tensor.at(ix, iy, TargetTensor::kLength) = box.length;
    tensor.at(ix, iy, TargetTensor::kWidth) = box.width;
    tensor.at(ix, iy, TargetTensor::kHeight) = box.height;
    tensor.at(ix, iy, TargetTensor::kCos) = std::cos(box.yaw);
    tensor.at(ix, iy, TargetTensor::kSin) = std::sin(box.yaw);
    for (int c = 0; c < class_count; ++c) {
      tensor.at(ix, iy, TargetTensor::kClassBase + c) = c == class_id ? 1.0 : 0.0;
    }
  }
  return tensor;
}

std::vector<Detection> decode_predictions(const TargetTensor& tensor, const RoiConfig& roi,
                                          double conf_threshold) {
  roi.validate();
  if (conf_threshold < 0.0 || conf_threshold > 1.0) {
    throw ParameterError("decode_predictions: threshold must lie in [0, 1]");
  }
  std::vector<Detection> detections;
  for (int ix = 0; ix < TargetTensor::kGridCells; ++ix) {
    for (int iy = 0; iy < TargetTensor::kGridCells; ++iy) {
      const double conf = tensor.at(ix, iy, TargetTensor::kConf);
      if (conf < conf_threshold) {
        continue;
      }
      Detection det;
      det.confidence = std::min(1.0, std::max(0.0, conf));
      det.box.center = Eigen::Vector3d(tensor.at(ix, iy, TargetTensor::kX),
                                       tensor.at(ix, iy, TargetTensor::kY),
                                       tensor.at(ix, iy, TargetTensor::kZ));
      det.box.length = tensor.at(ix, iy, TargetTensor::kLength);
      det.box.width = tensor.at(ix, iy, TargetTensor::kWidth);
      det.box.height = tensor.at(ix, iy, TargetTensor::kHeight);
      double yaw = std::atan2(tensor.at(ix, iy, TargetTensor::kSin), tensor.at(ix, iy, TargetTensor::kCos));
      if (yaw <= -M_PI) {
        yaw += 2.0 * M_PI;  // keep decoded yaw in (-pi, pi]
      }
      det.box.yaw = yaw;
      det.class_scores.resize(tensor.class_count());
      for (int c = 0; c < tensor.class_count(); ++c) {
        det.class_scores[c] = tensor.at(ix, iy, TargetTensor::kClassBase + c);
      }
      int best = 0;
      for (int c = 1; c < tensor.class_count(); ++c) {
        if (det.class_scores[c] > det.class_scores[best]) {
          best = c;
        }
      }
      det.class_id = best;
      detections.push_back(std::move(det));
    }
  }
  return detections;
}

std::vector<Detection> nms_bev(const std::vector<Detection>& detections, double iou_threshold) {
  if (iou_threshold < 0.0 || iou_threshold > 1.0) {
    throw ParameterError("nms_bev: threshold must lie in [0, 1]");
  }
  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detections[a].confidence > detections[b].confidence;
  });

  std::vector<Detection> kept;
  for (const std::size_t i : order) {
    const Detection& candidate = detections[i];
    bool suppressed = false;
    for (const Detection& keeper : kept) {
      if (keeper.class_id != candidate.class_id) {
        continue;
      }
      if (iou_bev(keeper.box, candidate.box) >= iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) {
      kept.push_back(candidate);
    }
  }
  return kept;
}

std::vector<std::uint8_t> write_target_tensor(const TargetTensor& tensor) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(16 + static_cast<std::size_t>(tensor.size()) * 8);
  append_le_u32(bytes, TargetTensor::kGridCells);
  append_le_u32(bytes, TargetTensor::kGridCells);
  append_le_u32(bytes, static_cast<std::uint32_t>(tensor.channels()));
  append_le_u32(bytes, static_cast<std::uint32_t>(tensor.class_count()));
  for (Eigen::Index i = 0; i < tensor.size(); ++i) {
    append_le_f64(bytes, tensor.data()[i]);
  }
  return bytes;
}

std::string detections_to_label_lines(const std::vector<Detection>& detections,
                                      const Calibration& calib,
                                      const std::vector<std::string>& class_names,
                                      Index image_height, Index image_width) {
  std::string out;
  for (const Detection& det : detections) {
    if (det.class_id < 0 || det.class_id >= static_cast<int>(class_names.size())) {
      throw ParameterError("detections_to_label_lines: class id has no name");
    }
    const ObjectLabel label =
        lidar_box_to_label(det.box, calib, class_names[static_cast<std::size_t>(det.class_id)],
                           image_height, image_width);
    out += format_label_line(label, det.confidence);
    out += '\n';
  }
  return out;
}

TargetTensor read_target_tensor(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 16) {
    throw FormatError("target tensor: truncated header");
  }
  const std::uint32_t grid_x = read_le_u32(bytes.data());
  const std::uint32_t grid_y = read_le_u32(bytes.data() + 4);
  const std::uint32_t channels = read_le_u32(bytes.data() + 8);
  const std::uint32_t class_count = read_le_u32(bytes.data() + 12);
  if (grid_x != TargetTensor::kGridCells || grid_y != TargetTensor::kGridCells) {
    throw FormatError("target tensor: unsupported grid size");
  }
  if (class_count < 1 || channels != TargetTensor::kClassBase + class_count) {
    throw FormatError("target tensor: channel count does not match class count");
  }
  TargetTensor tensor(static_cast<int>(class_count));
  if (bytes.size() != 16 + static_cast<std::size_t>(tensor.size()) * 8) {
    throw FormatError("target tensor: payload size does not match header");
  }
  for (Eigen::Index i = 0; i < tensor.size(); ++i) {
    tensor.data()[i] = read_le_f64(bytes.data() + 16 + i * 8);
  }
  return tensor;
}

}  // namespace vr3dense
