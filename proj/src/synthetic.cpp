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

#include "vr3dense/synthetic.hpp"

#include <cmath>

namespace vr3dense {

namespace {

constexpr double kTau = 2.0 * M_PI;

/// Soft rectangular window in x: ~1 between u0 and u1, ~0 outside, with
/// tanh-shaped flanks of width s.
double soft_band(double u, double u0, double u1, double s) {
  return 0.25 * (1.0 + std::tanh((u - u0) / s)) * (1.0 + std::tanh((u1 - u) / s));
}

/// Band-limited texture, channel phases decorrelate the planes. Values stay
/// inside (0, 1) without clamping so there are no photometric dead zones.
double texture(double x, double y, Index channel, double edge_term) {
  const double phase = 0.9 * static_cast<double>(channel);
  return 0.42 + 0.15 * std::sin(kTau * x / 11.0 + phase) + 0.11 * std::sin(kTau * y / 7.0 + 1.7 * phase) +
         0.07 * std::sin(kTau * (x + 0.7 * y) / 17.0 + 0.6 + phase) + edge_term;
}

SyntheticScene render(Index height, Index width, double focal, double baseline,
                      const std::function<double(double, double)>& depth_field,
                      const std::function<double(double)>& edge_profile) {
  SyntheticScene scene;
  scene.pair.left = ImageGrid(height, width, 3);
  scene.pair.right = ImageGrid(height, width, 3);
  scene.pair.focal = focal;
  scene.pair.baseline = baseline;
  scene.depth = ImageGrid(height, width, 1);
  const double fb = focal * baseline;
  for (Index r = 0; r < height; ++r) {
    for (Index c = 0; c < width; ++c) {
      const double u = static_cast<double>(c);
      const double v = static_cast<double>(r);
      const double z = depth_field(u, v);
      scene.depth(r, c) = z;
      const double disparity = fb / z;
      for (Index ch = 0; ch < 3; ++ch) {
        scene.pair.left(r, c, ch) = texture(u, v, ch, edge_profile(u));
        // The right view samples the same continuous texture shifted by the
        // disparity at this pixel, matching the left-to-right warp model.
        scene.pair.right(r, c, ch) = texture(u + disparity, v, ch, edge_profile(u + disparity));
      }
    }
  }
  return scene;
}

}  // namespace

SyntheticScene make_smooth_scene(Index height, Index width, double focal, double baseline) {
  const auto depth_field = [width, height](double u, double v) {
    return 20.0 + 2.5 * std::sin(kTau * u / static_cast<double>(width)) *
                      std::cos(kTau * v / static_cast<double>(height));
  };
  const auto edge_profile = [](double) { return 0.0; };
  return render(height, width, focal, baseline, depth_field, edge_profile);
}

SyntheticScene make_edge_scene(Index height, Index width, double focal, double baseline) {
  const double u0 = 0.35 * static_cast<double>(width);
  const double u1 = 0.65 * static_cast<double>(width);
  const double flank = 2.0;
  const auto depth_field = [u0, u1, flank](double u, double) {
    return 24.0 - 8.0 * soft_band(u, u0, u1, flank);
  };
  const auto edge_profile = [u0, u1, flank](double u) { return 0.22 * soft_band(u, u0, u1, flank); };
  return render(height, width, focal, baseline, depth_field, edge_profile);
}

}  // namespace vr3dense
