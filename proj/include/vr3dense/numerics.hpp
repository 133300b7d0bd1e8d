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

#include <cmath>
#include <functional>
#include <utility>

#include "vr3dense/grid.hpp"

namespace vr3dense {

/// Huber penalty: 0.5 r^2 for |r| <= delta, delta (|r| - delta/2) beyond.
/// Continuous and once-differentiable everywhere.
inline double huber(double residual, double delta) {
  if (!(delta > 0.0)) {
    throw ParameterError("huber: delta must be positive");
  }
  const double abs_r = std::abs(residual);
  if (abs_r <= delta) {
    return 0.5 * residual * residual;
  }
  return delta * (abs_r - 0.5 * delta);
}

/// d huber / d residual. Equals r inside the quadratic region, delta * sign(r) outside.
inline double huber_derivative(double residual, double delta) {
  if (!(delta > 0.0)) {
    throw ParameterError("huber_derivative: delta must be positive");
  }
  const double abs_r = std::abs(residual);
  if (abs_r <= delta) {
    return residual;
  }
  return residual > 0.0 ? delta : -delta;
}

/// Per-channel forward differences. The last column of the x-gradient and the
/// last row of the y-gradient are zero so both outputs keep the input shape.
std::pair<ImageGrid, ImageGrid> image_gradients(const ImageGrid& img);

/// Nearest-neighbor resize; each output pixel copies the source pixel at the
/// floor of the scaled index. No new values are introduced.
ImageGrid resize_nearest(const ImageGrid& img, Index new_height, Index new_width);

/// Central-difference gradient oracle: (f(x + eps e_i) - f(x - eps e_i)) / (2 eps)
/// per coordinate. Throws OracleError naming the coordinate if f goes non-finite.
Eigen::VectorXd finite_diff_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                     const Eigen::VectorXd& x, double eps = 1e-4);

/// |analytic - numeric| / max(1, |analytic|), maximized over coordinates.
double max_relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric);

}  // namespace vr3dense
