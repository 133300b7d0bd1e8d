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

#include <vector>

#include "vr3dense/errors.hpp"

namespace vr3dense {

using Index = Eigen::Index;

/// Row-major dense plane, the storage unit for one image channel.
using Array2d = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense multi-channel raster. Photometric images keep values in [0, 1];
/// depth maps are single-channel values in meters. Channels are stored as
/// separate planes so per-channel math stays plain Eigen expressions.
class ImageGrid {
 public:
  ImageGrid() = default;

  /// Zero-initialized grid of the given shape.
  ImageGrid(Index height, Index width, Index channels = 1);

  static ImageGrid constant(Index height, Index width, Index channels, double value);

  /// Wraps a single plane as a one-channel grid.
  static ImageGrid from_plane(Array2d plane);

  Index height() const { return height_; }
  Index width() const { return width_; }
  Index channels() const { return static_cast<Index>(planes_.size()); }
  Index size() const { return height_ * width_ * channels(); }

  double operator()(Index row, Index col, Index channel = 0) const {
    return planes_[static_cast<std::size_t>(channel)](row, col);
  }
  double& operator()(Index row, Index col, Index channel = 0) {
    return planes_[static_cast<std::size_t>(channel)](row, col);
  }

  Array2d& plane(Index channel) { return planes_[static_cast<std::size_t>(channel)]; }
  const Array2d& plane(Index channel) const { return planes_[static_cast<std::size_t>(channel)]; }

  bool same_shape(const ImageGrid& other) const {
    return height_ == other.height_ && width_ == other.width_ && channels() == other.channels();
  }

  /// Exact element-wise equality (bitwise for finite values).
  bool operator==(const ImageGrid& other) const;

  /// Flattens to row-major interleaved order: index = (row * width + col) * channels + channel.
  Eigen::VectorXd to_vector() const;
  static ImageGrid from_vector(Index height, Index width, Index channels, const Eigen::VectorXd& data);

  bool all_finite() const;

 private:
  Index height_ = 0;
  Index width_ = 0;
  std::vector<Array2d> planes_;
};

/// Single-channel grid of meters.
using DepthMap = ImageGrid;

}  // namespace vr3dense
