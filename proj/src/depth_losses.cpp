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

#include "vr3dense/depth_losses.hpp"

#include <cmath>
#include <string>

#include "vr3dense/numerics.hpp"

namespace vr3dense {

namespace {

constexpr double kSsimC1 = 0.01 * 0.01;
constexpr double kSsimC2 = 0.03 * 0.03;

double sign(double v) { return (v > 0.0) - (v < 0.0); }

void check_same_shape(const ImageGrid& a, const ImageGrid& b, const char* who) {
  if (!a.same_shape(b)) {
    throw ParameterError(std::string(who) + ": shape mismatch");
  }
}

void check_depth_map(const DepthMap& depth, const char* who) {
  if (depth.channels() != 1) {
    throw ParameterError(std::string(who) + ": depth maps must have a single channel");
  }
}

/// Signed forward-difference image gradients averaged across channels.
std::pair<Array2d, Array2d> mean_channel_gradients(const ImageGrid& img) {
  auto [dx, dy] = image_gradients(img);
  Array2d gx = dx.plane(0);
  Array2d gy = dy.plane(0);
  for (Index c = 1; c < img.channels(); ++c) {
    gx += dx.plane(c);
    gy += dy.plane(c);
  }
  gx /= static_cast<double>(img.channels());
  gy /= static_cast<double>(img.channels());
  return {std::move(gx), std::move(gy)};
}

struct Warp {
  ImageGrid image;  // resampled source
  Array2d mask;     // 1 where the sample lies fully inside the source
  ImageGrid jac;    // d image / d disparity, per pixel and channel
};

Warp warp_detail(const ImageGrid& src, const Array2d& disparity, WarpDirection direction) {
  const Index h = src.height();
  const Index w = src.width();
  const double shift = direction == WarpDirection::LeftToRight ? 1.0 : -1.0;
  Warp out{ImageGrid(h, w, src.channels()), Array2d::Zero(h, w), ImageGrid(h, w, src.channels())};
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      const double x = static_cast<double>(c) + shift * disparity(r, c);
      const bool inside = x >= 0.0 && x <= static_cast<double>(w - 1);
      out.mask(r, c) = inside ? 1.0 : 0.0;
      const double xc = std::min(std::max(x, 0.0), static_cast<double>(w - 1));
      const Index x0 = static_cast<Index>(std::floor(xc));
      const Index x1 = std::min(x0 + 1, w - 1);
      const double f = xc - static_cast<double>(x0);
      const bool interior = x > 0.0 && x < static_cast<double>(w - 1);
      for (Index ch = 0; ch < src.channels(); ++ch) {
        const double v0 = src(r, x0, ch);
        const double v1 = src(r, x1, ch);
        out.image(r, c, ch) = (1.0 - f) * v0 + f * v1;
        out.jac(r, c, ch) = interior ? shift * (v1 - v0) : 0.0;
      }
    }
  }
  return out;
}

/// d disparity / d depth: -fb / depth^2 strictly inside the clamp, 0 outside.
Array2d disparity_jacobian(const DepthMap& depth, double fb, double clamp_min, double clamp_max) {
  const Array2d& d = depth.plane(0);
  Array2d jac(d.rows(), d.cols());
  for (Index r = 0; r < d.rows(); ++r) {
    for (Index c = 0; c < d.cols(); ++c) {
      const double v = d(r, c);
      jac(r, c) = (v > clamp_min && v < clamp_max) ? -fb / (v * v) : 0.0;
    }
  }
  return jac;
}

/// Shared forward state for the stereo losses: clamped disparities, their
/// depth jacobians, and the two (optionally four) warped reconstructions.
struct WarpBundle {
  Array2d disp_l;  // fb / clamp(depth_l), drives left -> right
  Array2d disp_r;  // fb / clamp(depth_r), drives right -> left
  Array2d ddisp_l;
  Array2d ddisp_r;
  Warp rec_r;        // right image reconstructed from the left
  Warp rec_l;        // left image reconstructed from the right
  Warp cross_rec_l;  // left reconstructed from the right with disp_l negated
  Warp cross_rec_r;  // right reconstructed from the left with disp_r
  bool has_cross = false;
};

WarpBundle make_bundle(const StereoPair& pair, const DepthMap& depth_l, const DepthMap& depth_r,
                       double clamp_min, double clamp_max, bool cross) {
  check_same_shape(pair.left, pair.right, "stereo pair");
  check_depth_map(depth_l, "stereo loss");
  check_depth_map(depth_r, "stereo loss");
  if (depth_l.height() != pair.left.height() || depth_l.width() != pair.left.width() ||
      !depth_l.same_shape(depth_r)) {
    throw ParameterError("stereo loss: depth/image shape mismatch");
  }
  if (!(pair.fb() > 0.0)) {
    throw ParameterError("stereo loss: focal * baseline must be positive");
  }
  WarpBundle bundle;
  const double fb = pair.fb();
  bundle.disp_l = fb / depth_l.plane(0).min(clamp_max).max(clamp_min);
  bundle.disp_r = fb / depth_r.plane(0).min(clamp_max).max(clamp_min);
  bundle.ddisp_l = disparity_jacobian(depth_l, fb, clamp_min, clamp_max);
  bundle.ddisp_r = disparity_jacobian(depth_r, fb, clamp_min, clamp_max);
  bundle.rec_r = warp_detail(pair.left, bundle.disp_l, WarpDirection::LeftToRight);
  bundle.rec_l = warp_detail(pair.right, bundle.disp_r, WarpDirection::RightToLeft);
  if (cross) {
    bundle.cross_rec_l = warp_detail(pair.right, bundle.disp_l, WarpDirection::RightToLeft);
    bundle.cross_rec_r = warp_detail(pair.left, bundle.disp_r, WarpDirection::LeftToRight);
    bundle.has_cross = true;
  }
  return bundle;
}

/// Masked photometric term for one reconstruction; accumulates the gradient
/// with respect to the driving disparity times `weight` into disp_grad.
double photometric_term(const ImageGrid& target, const Warp& rec, double delta, double weight,
                        Array2d& disp_grad) {
  const Index h = target.height();
  const Index w = target.width();
  const Index channels = target.channels();
  const double norm = static_cast<double>(h * w) * static_cast<double>(channels);
  double sum = 0.0;
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      if (rec.mask(r, c) == 0.0) {
        continue;
      }
      for (Index ch = 0; ch < channels; ++ch) {
        const double residual = target(r, c, ch) - rec.image(r, c, ch);
        sum += huber(residual, delta);
        disp_grad(r, c) += weight * huber_derivative(residual, delta) * -rec.jac(r, c, ch) / norm;
      }
    }
  }
  return sum / norm;
}

double ssim_plane(const Array2d& a, const Array2d& b, Index r, Index c, double* coef_mu = nullptr,
                  double* coef_cov = nullptr, double* coef_var = nullptr, double* mu_a = nullptr,
                  double* mu_b = nullptr) {
  const Index r0 = std::max<Index>(0, r - 1);
  const Index r1 = std::min<Index>(a.rows() - 1, r + 1);
  const Index c0 = std::max<Index>(0, c - 1);
  const Index c1 = std::min<Index>(a.cols() - 1, c + 1);
  const double n = static_cast<double>((r1 - r0 + 1) * (c1 - c0 + 1));
  double sa = 0.0, sb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
  for (Index i = r0; i <= r1; ++i) {
    for (Index j = c0; j <= c1; ++j) {
      const double va = a(i, j);
      const double vb = b(i, j);
      sa += va;
      sb += vb;
      saa += va * va;
      sbb += vb * vb;
      sab += va * vb;
    }
  }
  const double ma = sa / n;
  const double mb = sb / n;
  const double var_a = saa / n - ma * ma;
  const double var_b = sbb / n - mb * mb;
  const double cov = sab / n - ma * mb;
  const double a1 = 2.0 * ma * mb + kSsimC1;
  const double a2 = 2.0 * cov + kSsimC2;
  const double b1 = ma * ma + mb * mb + kSsimC1;
  const double b2 = var_a + var_b + kSsimC2;
  const double s = (a1 * a2) / (b1 * b2);
  if (coef_mu != nullptr) {
    *coef_mu = (2.0 * ma * a2) / (b1 * b2) - s * 2.0 * mb / b1;
    *coef_cov = 2.0 * a1 / (b1 * b2);
    *coef_var = -s / b2;
    *mu_a = ma;
    *mu_b = mb;
  }
  return s;
}

/// d(sum_p SSIM(p)) / d b, scaled by `weight`, accumulated into grad.
void ssim_sum_backward_plane(const Array2d& a, const Array2d& b, double weight, Array2d& grad) {
  for (Index r = 0; r < a.rows(); ++r) {
    for (Index c = 0; c < a.cols(); ++c) {
      double coef_mu = 0.0, coef_cov = 0.0, coef_var = 0.0, mu_a = 0.0, mu_b = 0.0;
      ssim_plane(a, b, r, c, &coef_mu, &coef_cov, &coef_var, &mu_a, &mu_b);
      const Index r0 = std::max<Index>(0, r - 1);
      const Index r1 = std::min<Index>(a.rows() - 1, r + 1);
      const Index c0 = std::max<Index>(0, c - 1);
      const Index c1 = std::min<Index>(a.cols() - 1, c + 1);
      const double n = static_cast<double>((r1 - r0 + 1) * (c1 - c0 + 1));
      for (Index i = r0; i <= r1; ++i) {
        for (Index j = c0; j <= c1; ++j) {
          grad(i, j) += weight *
                        (coef_mu + coef_cov * (a(i, j) - mu_a) + coef_var * 2.0 * (b(i, j) - mu_b)) / n;
        }
      }
    }
  }
}

/// Structural dissimilarity of both reconstructions; gradients flow through
/// the warps into the depth maps.
double ssim_term(const StereoPair& pair, const WarpBundle& bundle, Array2d& depth_l_grad,
                 Array2d& depth_r_grad) {
  const Index h = pair.left.height();
  const Index w = pair.left.width();
  const Index channels = pair.left.channels();
  const double norm = static_cast<double>(h * w) * static_cast<double>(channels);
  double sum = 0.0;
  Array2d dl_rec_l = Array2d::Zero(h, w);  // d loss / d reconstructed-left samples (per channel pass)
  Array2d dl_rec_r = Array2d::Zero(h, w);
  for (Index ch = 0; ch < channels; ++ch) {
    const Array2d& target_l = pair.left.plane(ch);
    const Array2d& target_r = pair.right.plane(ch);
    const Array2d& rec_l = bundle.rec_l.image.plane(ch);
    const Array2d& rec_r = bundle.rec_r.image.plane(ch);
    for (Index r = 0; r < h; ++r) {
      for (Index c = 0; c < w; ++c) {
        sum += 2.0 - ssim_plane(target_l, rec_l, r, c) - ssim_plane(target_r, rec_r, r, c);
      }
    }
    dl_rec_l.setZero();
    dl_rec_r.setZero();
    ssim_sum_backward_plane(target_l, rec_l, -1.0 / (4.0 * norm), dl_rec_l);
    ssim_sum_backward_plane(target_r, rec_r, -1.0 / (4.0 * norm), dl_rec_r);
    for (Index r = 0; r < h; ++r) {
      for (Index c = 0; c < w; ++c) {
        depth_r_grad(r, c) += dl_rec_l(r, c) * bundle.rec_l.jac(r, c, ch) * bundle.ddisp_r(r, c);
        depth_l_grad(r, c) += dl_rec_r(r, c) * bundle.rec_r.jac(r, c, ch) * bundle.ddisp_l(r, c);
      }
    }
  }
  return sum / (4.0 * norm);
}

/// Reprojection term over the bundle; gradients land in depth space.
double repr_term(const StereoPair& pair, const WarpBundle& bundle, double delta,
                 Array2d& depth_l_grad, Array2d& depth_r_grad) {
  const Index h = pair.left.height();
  const Index w = pair.left.width();
  Array2d g_disp_l = Array2d::Zero(h, w);
  Array2d g_disp_r = Array2d::Zero(h, w);
  const double side_weight = bundle.has_cross ? 0.25 : 0.5;
  double value = photometric_term(pair.right, bundle.rec_r, delta, side_weight, g_disp_l) +
                 photometric_term(pair.left, bundle.rec_l, delta, side_weight, g_disp_r);
  if (bundle.has_cross) {
    value += photometric_term(pair.left, bundle.cross_rec_l, delta, side_weight, g_disp_l) +
             photometric_term(pair.right, bundle.cross_rec_r, delta, side_weight, g_disp_r);
  }
  value *= side_weight;
  depth_l_grad += g_disp_l * bundle.ddisp_l;
  depth_r_grad += g_disp_r * bundle.ddisp_r;
  return value;
}

/// Disparity-consistency term over the bundle, chained into depth space.
double cons_term(const WarpBundle& bundle, double delta, Array2d& depth_l_grad,
                 Array2d& depth_r_grad) {
  const Index h = bundle.disp_l.rows();
  const Index w = bundle.disp_l.cols();
  const double norm = static_cast<double>(h * w);
  double sum = 0.0;
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      const double residual = bundle.disp_l(r, c) - bundle.disp_r(r, c);
      sum += huber(residual, delta);
      const double d = huber_derivative(residual, delta) / norm;
      depth_l_grad(r, c) += d * bundle.ddisp_l(r, c);
      depth_r_grad(r, c) -= d * bundle.ddisp_r(r, c);
    }
  }
  return sum / norm;
}

}  // namespace

ImageGrid depth_to_disparity(const DepthMap& depth, double focal, double baseline, double clamp_min,
                             double clamp_max) {
  check_depth_map(depth, "depth_to_disparity");
  if (!(focal * baseline > 0.0)) {
    throw ParameterError("depth_to_disparity: focal * baseline must be positive");
  }
  if (!(clamp_min > 0.0) || !(clamp_max > clamp_min)) {
    throw ParameterError("depth_to_disparity: clamp range must be positive and ordered");
  }
  ImageGrid disparity(depth.height(), depth.width(), 1);
  disparity.plane(0) = focal * baseline / depth.plane(0).min(clamp_max).max(clamp_min);
  return disparity;
}

std::pair<ImageGrid, ImageGrid> warp_image(const ImageGrid& src, const ImageGrid& disparity,
                                           WarpDirection direction) {
  if (disparity.channels() != 1 || disparity.height() != src.height() ||
      disparity.width() != src.width()) {
    throw ParameterError("warp_image: disparity must be a single-channel grid matching the source");
  }
  Warp warp = warp_detail(src, disparity.plane(0), direction);
  return {std::move(warp.image), ImageGrid::from_plane(std::move(warp.mask))};
}

SmoothLoss loss_smooth_grad(const DepthMap& depth, const ImageGrid& img) {
  check_depth_map(depth, "loss_smooth");
  if (depth.height() != img.height() || depth.width() != img.width()) {
    throw ParameterError("loss_smooth: depth/image shape mismatch");
  }
  const auto [gx_img, gy_img] = mean_channel_gradients(img);
  const auto depth_grads = image_gradients(depth);
  const Array2d& gx_d = depth_grads.first.plane(0);
  const Array2d& gy_d = depth_grads.second.plane(0);
  const Index h = depth.height();
  const Index w = depth.width();
  const double norm = static_cast<double>(h * w);

  SmoothLoss out;
  out.depth_grad = ImageGrid(h, w, 1);
  Array2d& grad = out.depth_grad.plane(0);
  double sum = 0.0;
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      const double wx = std::exp(-std::abs(gx_img(r, c)));
      const double wy = std::exp(-std::abs(gy_img(r, c)));
      sum += std::abs(gx_d(r, c)) * wx + std::abs(gy_d(r, c)) * wy;
      if (c + 1 < w) {
        const double a = sign(gx_d(r, c)) * wx / norm;
        grad(r, c + 1) += a;
        grad(r, c) -= a;
      }
      if (r + 1 < h) {
        const double a = sign(gy_d(r, c)) * wy / norm;
        grad(r + 1, c) += a;
        grad(r, c) -= a;
      }
    }
  }
  out.value = sum / norm;
  return out;
}

double loss_smooth(const DepthMap& depth, const ImageGrid& img) {
  return loss_smooth_grad(depth, img).value;
}

EdgeLoss loss_edge_preservance_grad(const DepthMap& depth, const ImageGrid& img,
                                    const EdgeParams& params, EdgeVariant variant) {
  check_depth_map(depth, "loss_edge_preservance");
  if (depth.height() != img.height() || depth.width() != img.width()) {
    throw ParameterError("loss_edge_preservance: depth/image shape mismatch");
  }
  const auto [gx_img, gy_img] = mean_channel_gradients(img);
  const Array2d& alpha1_input = variant == EdgeVariant::DxDy ? gy_img : gx_img;
  const auto depth_grads = image_gradients(depth);
  const Array2d& gx_d = depth_grads.first.plane(0);
  const Array2d& gy_d = depth_grads.second.plane(0);
  const Index h = depth.height();
  const Index w = depth.width();
  const double norm = static_cast<double>(h * w);

  EdgeLoss out;
  out.depth_grad = ImageGrid(h, w, 1);
  Array2d& grad = out.depth_grad.plane(0);
  double sum = 0.0;
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      const double alpha0 = std::tanh(params.w0 * gx_img(r, c) + params.b0);
      const double alpha1 = std::tanh(params.w1 * alpha1_input(r, c) + params.b1);
      const double tx = gx_d(r, c) - alpha0 * gx_img(r, c);
      const double ty = gy_d(r, c) - alpha1 * gy_img(r, c);
      const double ex = std::exp(std::abs(tx));
      const double ey = std::exp(std::abs(ty));
      sum += 0.5 * (ex + ey);

      // d loss / d t, with the last column/row structurally independent of
      // the depth map (the forward-difference stencil zero-pads them).
      const double ax = 0.5 * ex * sign(tx) / norm;
      const double ay = 0.5 * ey * sign(ty) / norm;
      if (c + 1 < w) {
        grad(r, c + 1) += ax;
        grad(r, c) -= ax;
      }
      if (r + 1 < h) {
        grad(r + 1, c) += ay;
        grad(r, c) -= ay;
      }
      const double dalpha0 = (1.0 - alpha0 * alpha0);
      const double dalpha1 = (1.0 - alpha1 * alpha1);
      out.param_grad.w0 += ax * -gx_img(r, c) * dalpha0 * gx_img(r, c);
      out.param_grad.b0 += ax * -gx_img(r, c) * dalpha0;
      out.param_grad.w1 += ay * -gy_img(r, c) * dalpha1 * alpha1_input(r, c);
      out.param_grad.b1 += ay * -gy_img(r, c) * dalpha1;
    }
  }
  out.value = sum / norm - 1.0;
  return out;
}

double loss_edge_preservance(const DepthMap& depth, const ImageGrid& img, const EdgeParams& params,
                             EdgeVariant variant) {
  return loss_edge_preservance_grad(depth, img, params, variant).value;
}

EdgeLoss loss_eps_grad(const DepthMap& depth, const ImageGrid& img, const EdgeParams& params,
                       double beta_edge, EdgeVariant variant) {
  if (beta_edge < 0.0 || beta_edge > 1.0) {
    throw ParameterError("loss_eps: beta_edge must lie in [0, 1]");
  }
  EdgeLoss edge = loss_edge_preservance_grad(depth, img, params, variant);
  const SmoothLoss smooth = loss_smooth_grad(depth, img);
  edge.value = beta_edge * edge.value + (1.0 - beta_edge) * smooth.value;
  edge.depth_grad.plane(0) =
      beta_edge * edge.depth_grad.plane(0) + (1.0 - beta_edge) * smooth.depth_grad.plane(0);
  edge.param_grad.w0 *= beta_edge;
  edge.param_grad.b0 *= beta_edge;
  edge.param_grad.w1 *= beta_edge;
  edge.param_grad.b1 *= beta_edge;
  return edge;
}

double loss_eps(const DepthMap& depth, const ImageGrid& img, const EdgeParams& params,
                double beta_edge, EdgeVariant variant) {
  return loss_eps_grad(depth, img, params, beta_edge, variant).value;
}

PairLoss loss_reprojection_grad(const StereoPair& pair, const DepthMap& depth_l,
                                const DepthMap& depth_r, double delta, double clamp_min,
                                double clamp_max, bool cross_consistency) {
  const WarpBundle bundle = make_bundle(pair, depth_l, depth_r, clamp_min, clamp_max, cross_consistency);
  PairLoss out;
  out.depth_l_grad = ImageGrid(depth_l.height(), depth_l.width(), 1);
  out.depth_r_grad = ImageGrid(depth_l.height(), depth_l.width(), 1);
  out.value = repr_term(pair, bundle, delta, out.depth_l_grad.plane(0), out.depth_r_grad.plane(0));
  return out;
}

double loss_reprojection(const StereoPair& pair, const DepthMap& depth_l, const DepthMap& depth_r,
                         double delta, double clamp_min, double clamp_max, bool cross_consistency) {
  return loss_reprojection_grad(pair, depth_l, depth_r, delta, clamp_min, clamp_max, cross_consistency)
      .value;
}

ConsistencyLoss loss_disp_consistency_grad(const ImageGrid& disp_l2r, const ImageGrid& disp_r2l,
                                           double delta) {
  check_same_shape(disp_l2r, disp_r2l, "loss_disp_consistency");
  check_depth_map(disp_l2r, "loss_disp_consistency");
  const Index h = disp_l2r.height();
  const Index w = disp_l2r.width();
  const double norm = static_cast<double>(h * w);
  ConsistencyLoss out;
  out.disp_l2r_grad = ImageGrid(h, w, 1);
  out.disp_r2l_grad = ImageGrid(h, w, 1);
  double sum = 0.0;
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      // The right-to-left disparity is signed (negative for valid geometry),
      // so consistent maps satisfy disp_l2r = -disp_r2l.
      const double residual = disp_l2r(r, c) + disp_r2l(r, c);
      sum += huber(residual, delta);
      const double d = huber_derivative(residual, delta) / norm;
      out.disp_l2r_grad(r, c) = d;
      out.disp_r2l_grad(r, c) = d;
    }
  }
  out.value = sum / norm;
  return out;
}

double loss_disp_consistency(const ImageGrid& disp_l2r, const ImageGrid& disp_r2l, double delta) {
  return loss_disp_consistency_grad(disp_l2r, disp_r2l, delta).value;
}

ImageGrid ssim(const ImageGrid& a, const ImageGrid& b) {
  check_same_shape(a, b, "ssim");
  ImageGrid out(a.height(), a.width(), a.channels());
  for (Index ch = 0; ch < a.channels(); ++ch) {
    for (Index r = 0; r < a.height(); ++r) {
      for (Index c = 0; c < a.width(); ++c) {
        out(r, c, ch) = ssim_plane(a.plane(ch), b.plane(ch), r, c);
      }
    }
  }
  return out;
}

PairLoss loss_appearance_grad(const StereoPair& pair, const DepthMap& depth_l, const DepthMap& depth_r,
                              double alpha_ssim, double delta, double clamp_min, double clamp_max,
                              bool cross_consistency) {
  if (alpha_ssim < 0.0 || alpha_ssim > 1.0) {
    throw ParameterError("loss_appearance: alpha_ssim must lie in [0, 1]");
  }
  const WarpBundle bundle = make_bundle(pair, depth_l, depth_r, clamp_min, clamp_max, cross_consistency);
  const Index h = depth_l.height();
  const Index w = depth_l.width();
  PairLoss out;
  out.depth_l_grad = ImageGrid(h, w, 1);
  out.depth_r_grad = ImageGrid(h, w, 1);

  Array2d gl_ssim = Array2d::Zero(h, w);
  Array2d gr_ssim = Array2d::Zero(h, w);
  const double ssim_value = ssim_term(pair, bundle, gl_ssim, gr_ssim);
  Array2d gl_repr = Array2d::Zero(h, w);
  Array2d gr_repr = Array2d::Zero(h, w);
  const double repr_value = repr_term(pair, bundle, delta, gl_repr, gr_repr);

  out.value = alpha_ssim * ssim_value + (1.0 - alpha_ssim) * repr_value;
  out.depth_l_grad.plane(0) = alpha_ssim * gl_ssim + (1.0 - alpha_ssim) * gl_repr;
  out.depth_r_grad.plane(0) = alpha_ssim * gr_ssim + (1.0 - alpha_ssim) * gr_repr;
  return out;
}

double loss_appearance(const StereoPair& pair, const DepthMap& depth_l, const DepthMap& depth_r,
                       double alpha_ssim, double delta, double clamp_min, double clamp_max,
                       bool cross_consistency) {
  return loss_appearance_grad(pair, depth_l, depth_r, alpha_ssim, delta, clamp_min, clamp_max,
                              cross_consistency)
      .value;
}

SupervisedLoss loss_depth_sup_grad(const DepthMap& depth_l, const std::vector<ProjectedPoint>& projected,
                                   double lambda_sup, int epoch, double decay_rate) {
  check_depth_map(depth_l, "loss_depth_sup");
  if (lambda_sup < 0.0) {
    throw ParameterError("loss_depth_sup: lambda must be non-negative");
  }
  SupervisedLoss out;
  out.depth_grad = ImageGrid(depth_l.height(), depth_l.width(), 1);
  if (projected.empty()) {
    return out;
  }
  const double weight = lambda_sup * std::exp(-decay_rate * static_cast<double>(epoch));
  const double k = static_cast<double>(projected.size());
  double sum = 0.0;
  for (const ProjectedPoint& p : projected) {
    if (p.pixel_v < 0 || p.pixel_v >= depth_l.height() || p.pixel_u < 0 ||
        p.pixel_u >= depth_l.width()) {
      throw ParameterError("loss_depth_sup: projected point outside the depth map");
    }
    const double diff = p.depth - depth_l(p.pixel_v, p.pixel_u);
    sum += diff * diff;
    out.depth_grad(p.pixel_v, p.pixel_u) += weight * 2.0 * -diff / k;
  }
  out.value = weight * sum / k;
  return out;
}

double loss_depth_sup(const DepthMap& depth_l, const std::vector<ProjectedPoint>& projected,
                      double lambda_sup, int epoch, double decay_rate) {
  return loss_depth_sup_grad(depth_l, projected, lambda_sup, epoch, decay_rate).value;
}

DepthLossReport loss_depth_unsup(const StereoPair& pair, const DepthMap& depth_l,
                                 const DepthMap& depth_r, const ImageGrid& img_l,
                                 const EdgeParams& params, const DepthLossWeights& weights) {
  const WarpBundle bundle =
      make_bundle(pair, depth_l, depth_r, weights.clamp_min, weights.clamp_max, weights.cross_consistency);
  const Index h = depth_l.height();
  const Index w = depth_l.width();

  DepthLossReport report;
  report.depth_l_grad = ImageGrid(h, w, 1);
  report.depth_r_grad = ImageGrid(h, w, 1);
  Array2d& grad_l = report.depth_l_grad.plane(0);
  Array2d& grad_r = report.depth_r_grad.plane(0);

  const EdgeLoss eps =
      loss_eps_grad(depth_l, img_l, params, weights.beta_edge, weights.edge_variant);
  report.eps = eps.value;
  grad_l += weights.lambda_eps * eps.depth_grad.plane(0);
  report.param_grad.w0 = weights.lambda_eps * eps.param_grad.w0;
  report.param_grad.b0 = weights.lambda_eps * eps.param_grad.b0;
  report.param_grad.w1 = weights.lambda_eps * eps.param_grad.w1;
  report.param_grad.b1 = weights.lambda_eps * eps.param_grad.b1;

  Array2d gl = Array2d::Zero(h, w);
  Array2d gr = Array2d::Zero(h, w);
  report.repr = repr_term(pair, bundle, weights.huber_delta, gl, gr);
  const double repr_weight = weights.lambda_repr + weights.lambda_app * (1.0 - weights.alpha_ssim);
  grad_l += repr_weight * gl;
  grad_r += repr_weight * gr;

  gl.setZero();
  gr.setZero();
  report.cons = cons_term(bundle, weights.huber_delta, gl, gr);
  grad_l += weights.lambda_cons * gl;
  grad_r += weights.lambda_cons * gr;

  gl.setZero();
  gr.setZero();
  const double ssim_value = ssim_term(pair, bundle, gl, gr);
  report.app = weights.alpha_ssim * ssim_value + (1.0 - weights.alpha_ssim) * report.repr;
  grad_l += weights.lambda_app * weights.alpha_ssim * gl;
  grad_r += weights.lambda_app * weights.alpha_ssim * gr;

  report.total = weights.lambda_eps * report.eps + weights.lambda_repr * report.repr +
                 weights.lambda_cons * report.cons + weights.lambda_app * report.app;
  if (!std::isfinite(report.total)) {
    throw ParameterError("loss_depth_unsup: non-finite loss");
  }
  return report;
}

FitResult fit_depth_toy(const StereoPair& pair, const DepthMap& init_depth,
                        const DepthLossWeights& weights, const EdgeParams& params, int steps,
                        double learning_rate) {
  if (steps < 1) {
    throw ParameterError("fit_depth_toy: steps must be at least 1");
  }
  if (learning_rate < 0.0) {
    throw ParameterError("fit_depth_toy: learning rate must be non-negative");
  }
  FitResult result;
  result.depth_l = init_depth;
  result.depth_r = init_depth;
  result.params = params;
  result.trace.reserve(static_cast<std::size_t>(steps) + 1);

  for (int step = 0; step <= steps; ++step) {
    const DepthLossReport report =
        loss_depth_unsup(pair, result.depth_l, result.depth_r, pair.left, result.params, weights);
    if (!std::isfinite(report.total)) {
      throw OptimizationError("fit_depth_toy: non-finite loss at step " + std::to_string(step));
    }
    result.trace.push_back(report.total);
    if (step == steps) {
      break;
    }
    result.depth_l.plane(0) = (result.depth_l.plane(0) - learning_rate * report.depth_l_grad.plane(0))
                                  .min(weights.clamp_max)
                                  .max(weights.clamp_min);
    result.depth_r.plane(0) = (result.depth_r.plane(0) - learning_rate * report.depth_r_grad.plane(0))
                                  .min(weights.clamp_max)
                                  .max(weights.clamp_min);
    result.params.w0 -= learning_rate * report.param_grad.w0;
    result.params.b0 -= learning_rate * report.param_grad.b0;
    result.params.w1 -= learning_rate * report.param_grad.w1;
    result.params.b1 -= learning_rate * report.param_grad.b1;
  }
  return result;
}

}  // namespace vr3dense
