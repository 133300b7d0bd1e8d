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
#include <cstdint>
#include <optional>
#include <vector>

#include "vr3dense/errors.hpp"
#include "vr3dense/kitti_io.hpp"

namespace vr3dense {

/// Fixed region of interest in the LiDAR frame and its voxel resolution.
/// Defaults give 256 x 256 x 16 non-cubic voxels over x [0, 70), y [-25, 25),
/// z [-2.5, 1.0) meters.
struct RoiConfig {
  double x_min = 0.0;
  double x_max = 70.0;
  double y_min = -25.0;
  double y_max = 25.0;
  double z_min = -2.5;
  double z_max = 1.0;
  int nx = 256;
  int ny = 256;
  int nz = 16;

  void validate() const;
  double x_width() const { return (x_max - x_min) / nx; }
  double y_width() const { return (y_max - y_min) / ny; }
  double z_width() const { return (z_max - z_min) / nz; }
  std::int64_t voxel_count() const {
    return static_cast<std::int64_t>(nx) * ny * nz;
  }
};

/// Point-density grid over a RoiConfig, laid out (ix, iy, iz) row-major.
struct VoxelGrid {
  RoiConfig config;
  Eigen::VectorXd density;

  double& at(int ix, int iy, int iz) {
    return density[(static_cast<std::int64_t>(ix) * config.ny + iy) * config.nz + iz];
  }
  double at(int ix, int iy, int iz) const {
    return density[(static_cast<std::int64_t>(ix) * config.ny + iy) * config.nz + iz];
  }
};

enum class DensityMode { Raw, Log1p, Binary };

/// Voxel index of a point, or absent when the point falls outside the ROI.
/// Intervals are half-open per axis: [min, max).
std::optional<std::array<int, 3>> voxel_index(double x, double y, double z, const RoiConfig& config);

/// Counts points per voxel. Out-of-ROI points are ignored. With threads > 1
/// the cloud is partitioned and per-thread integer counts are merged, which
/// keeps the result bitwise identical to sequential execution.
VoxelGrid voxelize(const PointCloud& cloud, const RoiConfig& config, int threads = 1);

/// Raw keeps counts, Log1p maps counts to ln(1 + count), Binary to {0, 1}.
VoxelGrid normalize_density(const VoxelGrid& grid, DensityMode mode);

/// Grid file layout: nine little-endian int32 (nx, ny, nz, then the six ROI
/// bounds in millimeters), followed by nx*ny*nz little-endian float32 in
/// (ix, iy, iz) row-major order.
std::vector<std::uint8_t> write_voxel_grid(const VoxelGrid& grid);
VoxelGrid read_voxel_grid(const std::vector<std::uint8_t>& bytes);

}  // namespace vr3dense
