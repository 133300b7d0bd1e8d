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
#include <optional>
#include <string>
#include <vector>

#include "vr3dense/grid.hpp"

namespace vr3dense {

/// One LiDAR return in the sensor frame: x forward, y left, z up (meters).
/// Stored as float to mirror the on-disk velodyne format exactly.
struct LidarPoint {
  float x = 0.0f;
  float y = 0.0f;
  float z = 0.0f;
  float intensity = 0.0f;
};

struct PointCloud {
  std::vector<LidarPoint> points;

  std::size_t size() const { return points.size(); }
};

/// One line of a KITTI object label file. Locations are camera-frame meters,
/// dimensions are (height, width, length).
struct ObjectLabel {
  std::string class_name;
  double truncated = 0.0;
  int occluded = 0;
  double alpha = 0.0;
  double bbox_left = 0.0;
  double bbox_top = 0.0;
  double bbox_right = 0.0;
  double bbox_bottom = 0.0;
  double height = 0.0;
  double width = 0.0;
  double length = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double rotation_y = 0.0;
};

/// KITTI camera/LiDAR calibration. `focal` is P2(0,0); `baseline` is derived
/// from P2/P3 when a P3 line is present, otherwise the configured default.
struct Calibration {
  Eigen::Matrix<double, 3, 4> P2 = Eigen::Matrix<double, 3, 4>::Zero();
  Eigen::Matrix3d R0_rect = Eigen::Matrix3d::Identity();
  Eigen::Matrix<double, 3, 4> Tr_velo_to_cam = Eigen::Matrix<double, 3, 4>::Zero();
  double focal = 0.0;
  double baseline = 0.0;

  /// Identity chain with the given intrinsics; handy for synthetic scenes.
  static Calibration identity(double focal_px, double cx, double cy, double baseline_m);
};

// -- Velodyne scans: consecutive little-endian float32 (x, y, z, intensity). --

PointCloud read_point_cloud(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> write_point_cloud(const PointCloud& cloud);

// -- Object labels: 15 whitespace-separated fields, optional 16th score. --

ObjectLabel parse_label_line(const std::string& line);
std::vector<ObjectLabel> parse_labels(const std::string& text);

/// Serializes at 2-decimal fixed precision; appends the score as a 16th field
/// when provided.
std::string format_label_line(const ObjectLabel& label, std::optional<double> score = std::nullopt);

// -- Calibration files: "KEY: v1 v2 ..." lines. --

constexpr double kDefaultStereoBaseline = 0.54;  // meters

Calibration parse_calib(const std::string& text, double default_baseline = kDefaultStereoBaseline);

// -- Images: binary PPM (P6, 8-bit) and PGM (P5, 8-bit or 16-bit). --

/// Decodes P5/P6 and normalizes samples to [0, 1] by the header maxval.
ImageGrid decode_image(const std::vector<std::uint8_t>& bytes);

/// 8-bit binary PPM; samples are round-half-up of value * 255.
std::vector<std::uint8_t> encode_ppm(const ImageGrid& img);

/// Binary PGM of a single-channel grid; maxval 255 or 65535.
std::vector<std::uint8_t> encode_pgm(const ImageGrid& img, int maxval = 255);

/// Depth maps ride in 16-bit PGM at a fixed-point scale (counts per meter).
constexpr double kDepthPgmScale = 256.0;

/// Decodes a 16-bit PGM into meters (sample / scale). Zero samples mean
/// "no measurement" and are preserved as 0.
ImageGrid decode_depth_pgm(const std::vector<std::uint8_t>& bytes, double scale = kDepthPgmScale);
std::vector<std::uint8_t> encode_depth_pgm(const ImageGrid& depth, double scale = kDepthPgmScale);

// -- Whole-file helpers. --

std::vector<std::uint8_t> read_binary_file(const std::string& path);
void write_binary_file(const std::string& path, const std::vector<std::uint8_t>& bytes);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace vr3dense
