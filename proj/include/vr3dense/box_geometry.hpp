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

#include <array>
#include <vector>

#include "vr3dense/kitti_io.hpp"

namespace vr3dense {

/// Yaw-oriented cuboid in the LiDAR frame (x forward, y left, z up).
/// Size is (length, width, height); yaw rotates about +z.
struct OrientedBox3D {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double length = 0.0;
  double width = 0.0;
  double height = 0.0;
  double yaw = 0.0;

  double volume() const { return length * width * height; }
  double bev_area() const { return length * width; }
};

/// A LiDAR point landed on the image plane. (u, v) are the exact projected
/// coordinates; pixel_u/pixel_v are the rounded pixel it was binned into.
struct ProjectedPoint {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
  int pixel_u = 0;
  int pixel_v = 0;
};

/// The 8 corners: bottom face counter-clockwise seen from +z, then the top
/// face in the same x/y order. Corner 0 is (+l/2, +w/2, -h/2) in box frame.
std::array<Eigen::Vector3d, 8> box_corners(const OrientedBox3D& box);

/// Bird's-eye-view IoU of the two rotated footprints (exact polygon clipping).
double iou_bev(const OrientedBox3D& a, const OrientedBox3D& b);

/// 3D IoU: BEV polygon intersection area times the z-interval overlap.
double iou_3d(const OrientedBox3D& a, const OrientedBox3D& b);

/// Generalized IoU: IoU - (|C| - |U|)/|C| where C is the prism of the BEV
/// convex hull of both footprints over the combined z-extent. Range (-1, 1];
/// giou_3d(a, a) = 1 exactly.
double giou_3d(const OrientedBox3D& a, const OrientedBox3D& b);

/// x_cam = R0_rect * Tr_velo_to_cam * (x, y, z, 1).
Eigen::Vector3d lidar_to_camera(const Eigen::Vector3d& point, const Calibration& calib);

/// Inverse of lidar_to_camera. Throws CalibrationError on a singular chain.
Eigen::Vector3d camera_to_lidar(const Eigen::Vector3d& point, const Calibration& calib);

/// Projects all points through the calibration onto an image of the given
/// size. Keeps points with positive depth whose rounded pixel is in bounds;
/// when several land on one pixel the smallest depth wins. Output is sorted
/// by (pixel_v, pixel_u).
std::vector<ProjectedPoint> project_points(const PointCloud& cloud, const Calibration& calib,
                                           Index image_height, Index image_width);

/// Renders projected points into a sparse depth map (0 where no point fell).
ImageGrid sparse_depth_image(const std::vector<ProjectedPoint>& points, Index height, Index width);

/// Camera-frame KITTI label to a LiDAR-frame box: inverts the rectification
/// and velo-to-cam transforms, lifts the bottom-center anchor to the geometric
/// center, and maps heading via yaw = -rotation_y - pi/2 wrapped to [-pi, pi].
OrientedBox3D label_to_lidar_box(const ObjectLabel& label, const Calibration& calib);

/// Inverse of label_to_lidar_box. The 2D bbox is filled from the projected
/// corners when image dimensions are given, otherwise zeros.
ObjectLabel lidar_box_to_label(const OrientedBox3D& box, const Calibration& calib,
                               const std::string& class_name, Index image_height = 0,
                               Index image_width = 0);

/// Wraps an angle to [-pi, pi].
double wrap_angle(double radians);

}  // namespace vr3dense
