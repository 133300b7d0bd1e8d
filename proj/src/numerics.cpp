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

#include "vr3dense/numerics.hpp"

#include <string>

namespace vr3dense {

std::pair<ImageGrid, ImageGrid> image_gradients(const ImageGrid& img) {
  const Index h = img.height();
  const Index w = img.width();
  if (h < 2 || w < 2) {
    throw ParameterError("image_gradients: both dimensions must be at least 2");
  }
  ImageGrid dx(h, w, img.channels());
  ImageGrid dy(h, w, img.channels());
  for (Index c = 0; c < img.channels(); ++c) {
    const Array2d& p = img.plane(c);
    dx.plane(c).leftCols(w - 1) = p.rightCols(w - 1) - p.leftCols(w - 1);
    dy.plane(c).topRows(h - 1) = p.bottomRows(h - 1) - p.topRows(h - 1);
  }
  return {std::move(dx), std::move(dy)};
}

ImageGrid resize_nearest(const ImageGrid& img, Index new_height, Index new_width) {
  if (new_height < 1 || new_width < 1) {
    throw ParameterError("resize_nearest: target dimensions must be positive");
  }
  ImageGrid out(new_height, new_width, img.channels());
  for (Index r = 0; r < new_height; ++r) {
    const Index src_r = r * img.height() / new_height;
    for (Index c = 0; c < new_width; ++c) {
      const Index src_c = c * img.width() / new_width;
      for (Index ch = 0; ch < img.channels(); ++ch) {
        out(r, c, ch) = img(src_r, src_c, ch);
      }
    }
  }
  return out;
}

Eigen::VectorXd finite_diff_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                     const Eigen::VectorXd& x, double eps) {
  if (!(eps > 0.0)) {
    throw ParameterError("finite_diff_gradient: eps must be positive");
  }
  Eigen::VectorXd grad(x.size());
  Eigen::VectorXd probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + eps;
    const double up = f(probe);
    probe[i] = x[i] - eps;
    const double down = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw OracleError("finite_diff_gradient: non-finite value at coordinate " + std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * eps);
  }
  return grad;
}

double max_relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric) {
  if (analytic.size() != numeric.size()) {
    throw ParameterError("max_relative_error: size mismatch");
  }
  double worst = 0.0;
  for (Index i = 0; i < analytic.size(); ++i) {
    const double denom = std::max(1.0, std::abs(analytic[i]));
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

}  // namespace vr3dense
