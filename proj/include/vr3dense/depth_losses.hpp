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

#include <utility>
#include <vector>

#include "vr3dense/box_geometry.hpp"
#include "vr3dense/grid.hpp"

namespace vr3dense {

/// Learnable scale/bias pairs for the edge-preservance loss. alpha0 =
/// tanh(w0 * dI/dx + b0) and alpha1 = tanh(w1 * g + b1), where g is the
/// y-image-gradient by default (see EdgeVariant).
struct EdgeParams {
  double w0 = 0.0;
  double b0 = 0.0;
  double w1 = 0.0;
  double b1 = 0.0;

  Eigen::Vector4d as_vector() const { return {w0, b0, w1, b1}; }
  static EdgeParams from_vector(const Eigen::Vector4d& v) { return {v[0], v[1], v[2], v[3]}; }
};

/// Which image gradient feeds alpha1: the y-gradient (pairing the y-term with
/// y-gradients) or the x-gradient in both terms.
enum class EdgeVariant { DxDy, DxDx };

struct DepthLossWeights {
  double lambda_eps = 1.0;
  double lambda_repr = 1.0;
  double lambda_cons = 1.0;
  double lambda_app = 1.0;
  double lambda_sup = 1.0;
  double beta_edge = 0.5;
  double alpha_ssim = 0.85;
  double sup_decay_rate = 0.01;
  double clamp_min = 0.1;   // meters
  double clamp_max = 100.0;  // meters
  double huber_delta = 1.0;
  bool cross_consistency = false;
  EdgeVariant edge_variant = EdgeVariant::DxDy;
};

/// Rectified stereo pair with shared intrinsics. Images are RGB in [0, 1].
struct StereoPair {
  ImageGrid left;
  ImageGrid right;
  double focal = 0.0;     // pixels
  double baseline = 0.0;  // meters

  double fb() const { return focal * baseline; }
};

enum class WarpDirection { LeftToRight, RightToLeft };

/// disparity = focal * baseline / clamp(depth, clamp_min, clamp_max).
ImageGrid depth_to_disparity(const DepthMap& depth, double focal, double baseline, double clamp_min,
                             double clamp_max);

/// Horizontal bilinear warp: output(v, u) samples src at (u + d, v) for
/// LeftToRight and (u - d, v) for RightToLeft. The mask is 1 where the sample
/// location lies fully inside the source and 0 otherwise.
std::pair<ImageGrid, ImageGrid> warp_image(const ImageGrid& src, const ImageGrid& disparity,
                                           WarpDirection direction);

// -- Scalar losses (values only). Gradient-bearing variants follow. --

double loss_smooth(const DepthMap& depth, const ImageGrid& img);
double loss_edge_preservance(const DepthMap& depth, const ImageGrid& img, const EdgeParams& params,
                             EdgeVariant variant = EdgeVariant::DxDy);
double loss_eps(const DepthMap& depth, const ImageGrid& img, const EdgeParams& params,
                double beta_edge, EdgeVariant variant = EdgeVariant::DxDy);
double loss_reprojection(const StereoPair& pair, const DepthMap& depth_l, const DepthMap& depth_r,
                         double delta, double clamp_min, double clamp_max,
                         bool cross_consistency = false);
double loss_disp_consistency(const ImageGrid& disp_l2r, const ImageGrid& disp_r2l, double delta);
double loss_appearance(const StereoPair& pair, const DepthMap& depth_l, const DepthMap& depth_r,
                       double alpha_ssim, double delta, double clamp_min, double clamp_max,
                       bool cross_consistency = false);
double loss_depth_sup(const DepthMap& depth_l, const std::vector<ProjectedPoint>& projected,
                      double lambda_sup, int epoch, double decay_rate);

/// Per-pixel structural similarity over a 3x3 uniform window (truncated at
/// borders) with stabilizers C1 = 0.01^2, C2 = 0.03^2. Values lie in [-1, 1].
ImageGrid ssim(const ImageGrid& a, const ImageGrid& b);

// -- Gradient-bearing variants. --

struct SmoothLoss {
  double value = 0.0;
  ImageGrid depth_grad;
};
SmoothLoss loss_smooth_grad(const DepthMap& depth, const ImageGrid& img);

struct EdgeLoss {
  double value = 0.0;
  ImageGrid depth_grad;
  EdgeParams param_grad;
};
EdgeLoss loss_edge_preservance_grad(const DepthMap& depth, const ImageGrid& img,
                                    const EdgeParams& params, EdgeVariant variant = EdgeVariant::DxDy);
EdgeLoss loss_eps_grad(const DepthMap& depth, const ImageGrid& img, const EdgeParams& params,
                       double beta_edge, EdgeVariant variant = EdgeVariant::DxDy);

struct PairLoss {
  double value = 0.0;
  ImageGrid depth_l_grad;
  ImageGrid depth_r_grad;
};
PairLoss loss_reprojection_grad(const StereoPair& pair, const DepthMap& depth_l,
                                const DepthMap& depth_r, double delta, double clamp_min,
                                double clamp_max, bool cross_consistency = false);
PairLoss loss_appearance_grad(const StereoPair& pair, const DepthMap& depth_l, const DepthMap& depth_r,
                              double alpha_ssim, double delta, double clamp_min, double clamp_max,
                              bool cross_consistency = false);

struct ConsistencyLoss {
  double value = 0.0;
  ImageGrid disp_l2r_grad;
  ImageGrid disp_r2l_grad;
};
ConsistencyLoss loss_disp_consistency_grad(const ImageGrid& disp_l2r, const ImageGrid& disp_r2l,
                                           double delta);

struct SupervisedLoss {
  double value = 0.0;
  ImageGrid depth_grad;
};
SupervisedLoss loss_depth_sup_grad(const DepthMap& depth_l, const std::vector<ProjectedPoint>& projected,
                                   double lambda_sup, int epoch, double decay_rate);

/// Unsupervised total: lambda_eps * eps + lambda_repr * repr +
/// lambda_cons * cons + lambda_app * app, with gradients with respect to both
/// depth maps and the edge parameters. The edge terms read (depth_l, img_l).
struct DepthLossReport {
  double eps = 0.0;
  double repr = 0.0;
  double cons = 0.0;
  double app = 0.0;
  double total = 0.0;
  ImageGrid depth_l_grad;
  ImageGrid depth_r_grad;
  EdgeParams param_grad;
};
DepthLossReport loss_depth_unsup(const StereoPair& pair, const DepthMap& depth_l,
                                 const DepthMap& depth_r, const ImageGrid& img_l,
                                 const EdgeParams& params, const DepthLossWeights& weights);

/// Direct per-pixel gradient descent on loss_depth_unsup over both depth maps
/// and the edge parameters. Depths are re-clamped after every step. The trace
/// holds steps + 1 losses: the value before any update, then one per step.
struct FitResult {
  DepthMap depth_l;
  DepthMap depth_r;
  EdgeParams params;
  std::vector<double> trace;
};
FitResult fit_depth_toy(const StereoPair& pair, const DepthMap& init_depth,
                        const DepthLossWeights& weights, const EdgeParams& params, int steps,
                        double learning_rate);

}  // namespace vr3dense
