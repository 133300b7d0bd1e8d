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

#include "vr3dense/grid.hpp"

namespace vr3dense {

ImageGrid::ImageGrid(Index height, Index width, Index channels) : height_(height), width_(width) {
  if (height < 1 || width < 1 || channels < 1) {
    throw ParameterError("ImageGrid: dimensions must be positive");
  }
  planes_.assign(static_cast<std::size_t>(channels), Array2d::Zero(height, width));
}

ImageGrid ImageGrid::constant(Index height, Index width, Index channels, double value) {
  ImageGrid grid(height, width, channels);
  for (Index c = 0; c < channels; ++c) {
    grid.plane(c).setConstant(value);
  }
  return grid;
}

ImageGrid ImageGrid::from_plane(Array2d plane) {
  ImageGrid grid(plane.rows(), plane.cols(), 1);
  grid.plane(0) = std::move(plane);
  return grid;
}

bool ImageGrid::operator==(const ImageGrid& other) const {
  if (!same_shape(other)) {
    return false;
  }
  for (Index c = 0; c < channels(); ++c) {
    if (!(plane(c) == other.plane(c)).all()) {
      return false;
    }
  }
  return true;
}

Eigen::VectorXd ImageGrid::to_vector() const {
  Eigen::VectorXd out(size());
  Index i = 0;
  for (Index r = 0; r < height_; ++r) {
    for (Index c = 0; c < width_; ++c) {
      for (Index ch = 0; ch < channels(); ++ch) {
        out[i++] = (*this)(r, c, ch);
      }
    }
  }
  return out;
}

ImageGrid ImageGrid::from_vector(Index height, Index width, Index channels, const Eigen::VectorXd& data) {
  if (data.size() != height * width * channels) {
    throw ParameterError("ImageGrid::from_vector: data length does not match shape");
  }
  ImageGrid grid(height, width, channels);
  Index i = 0;
  for (Index r = 0; r < height; ++r) {
    for (Index c = 0; c < width; ++c) {
      for (Index ch = 0; ch < channels; ++ch) {
        grid(r, c, ch) = data[i++];
      }
    }
  }
  return grid;
}

bool ImageGrid::all_finite() const {
  for (Index c = 0; c < channels(); ++c) {
    if (!plane(c).isFinite().all()) {
      return false;
    }
  }
  return true;
}

}  // namespace vr3dense
