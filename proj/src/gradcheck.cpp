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

#include "vr3dense/gradcheck.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "vr3dense/depth_losses.hpp"
#include "vr3dense/detection_losses.hpp"
#include "vr3dense/numerics.hpp"
#include "vr3dense/rng.hpp"

namespace vr3dense {

namespace {

constexpr Index kImageHeight = 6;
constexpr Index kImageWidth = 10;
constexpr double kFb = 40.0;          // focal * baseline for stereo fixtures
constexpr double kKinkMargin = 1e-2;  // distance kept from non-smooth loci

ImageGrid random_image(Rng& rng, Index h, Index w, Index channels) {
  ImageGrid img(h, w, channels);
  for (Index c = 0; c < channels; ++c) {
    for (Index r = 0; r < h; ++r) {
      for (Index col = 0; col < w; ++col) {
        img(r, col, c) = rng.uniform(0.1, 0.9);
      }
    }
  }
  return img;
}

EdgeParams random_params(Rng& rng) {
  return {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
          rng.uniform(-0.5, 0.5)};
}

/// True when every forward difference of the depth map, and every exponent of
/// the edge-preservance loss, sits clear of its absolute-value kink.
bool depth_margins_ok(const DepthMap& depth, const ImageGrid& img, const EdgeParams& params,
                      EdgeVariant variant) {
  const auto img_grads = image_gradients(img);
  Array2d gx_img = img_grads.first.plane(0);
  Array2d gy_img = img_grads.second.plane(0);
  for (Index c = 1; c < img.channels(); ++c) {
    gx_img += img_grads.first.plane(c);
    gy_img += img_grads.second.plane(c);
  }
  gx_img /= static_cast<double>(img.channels());
  gy_img /= static_cast<double>(img.channels());
  const Array2d& alpha1_input = variant == EdgeVariant::DxDy ? gy_img : gx_img;
  const auto depth_grads = image_gradients(depth);
  const Array2d& gx_d = depth_grads.first.plane(0);
  const Array2d& gy_d = depth_grads.second.plane(0);
  for (Index r = 0; r < depth.height(); ++r) {
    for (Index c = 0; c < depth.width(); ++c) {
      const double alpha0 = std::tanh(params.w0 * gx_img(r, c) + params.b0);
      const double alpha1 = std::tanh(params.w1 * alpha1_input(r, c) + params.b1);
      if (c + 1 < depth.width()) {
        if (std::abs(gx_d(r, c)) < kKinkMargin) {
          return false;
        }
        if (std::abs(gx_d(r, c) - alpha0 * gx_img(r, c)) < kKinkMargin) {
          return false;
        }
      }
      if (r + 1 < depth.height()) {
        if (std::abs(gy_d(r, c)) < kKinkMargin) {
          return false;
        }
        if (std::abs(gy_d(r, c) - alpha1 * gy_img(r, c)) < kKinkMargin) {
          return false;
        }
      }
    }
  }
  return true;
}

/// Depth built from disparities in a narrow band around 2.5 px: fractional
/// parts stay inside [0.3, 0.7] (bilinear samples clear of the integer
/// lattice, masks stable under probes) and neighboring depths stay within a
/// few meters, keeping the exponential edge terms in a range where central
/// differences resolve every coordinate.
DepthMap random_depth_from_disparity(Rng& rng, Index h, Index w) {
  DepthMap depth(h, w, 1);
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      depth(r, c) = kFb / (2.0 + rng.uniform(0.3, 0.7));
    }
  }
  return depth;
}

/// Depth for the plain regularizer checks: moderate per-pixel spread.
DepthMap random_band_depth(Rng& rng, Index h, Index w) {
  DepthMap depth(h, w, 1);
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      depth(r, c) = 25.0 + rng.uniform(-2.0, 2.0);
    }
  }
  return depth;
}

bool cons_margins_ok(const Array2d& disp_l, const Array2d& disp_r, double delta) {
  for (Index r = 0; r < disp_l.rows(); ++r) {
    for (Index c = 0; c < disp_l.cols(); ++c) {
      const double residual = disp_l(r, c) - disp_r(r, c);
      if (std::abs(std::abs(residual) - delta) < kKinkMargin) {
        return false;
      }
    }
  }
  return true;
}

struct StereoFixture {
  StereoPair pair;
  DepthMap depth_l;
  DepthMap depth_r;
  EdgeParams params;
};

StereoFixture make_stereo_fixture(Rng& rng, EdgeVariant variant) {
  for (int attempt = 0; attempt < 500; ++attempt) {
    StereoFixture fx;
    fx.pair.left = random_image(rng, kImageHeight, kImageWidth, 3);
    fx.pair.right = random_image(rng, kImageHeight, kImageWidth, 3);
    fx.pair.focal = kFb;
    fx.pair.baseline = 1.0;
    fx.depth_l = random_depth_from_disparity(rng, kImageHeight, kImageWidth);
    fx.depth_r = random_depth_from_disparity(rng, kImageHeight, kImageWidth);
    fx.params = random_params(rng);
    const Array2d disp_l = kFb / fx.depth_l.plane(0);
    const Array2d disp_r = kFb / fx.depth_r.plane(0);
    if (!cons_margins_ok(disp_l, disp_r, 1.0)) {
      continue;
    }
    if (!depth_margins_ok(fx.depth_l, fx.pair.left, fx.params, variant)) {
      continue;
    }
    return fx;
  }
  throw OracleError("gradcheck: could not sample a stereo fixture away from kink loci");
}

Eigen::VectorXd pack_pair(const DepthMap& depth_l, const DepthMap& depth_r, const EdgeParams& params) {
  const Index pixels = depth_l.height() * depth_l.width();
  Eigen::VectorXd x(2 * pixels + 4);
  x.segment(0, pixels) = depth_l.to_vector();
  x.segment(pixels, pixels) = depth_r.to_vector();
  x.segment(2 * pixels, 4) = params.as_vector();
  return x;
}

struct LossCheck {
  std::string name;
  std::function<std::pair<Eigen::VectorXd, Eigen::VectorXd>(Rng&)> run;  // (analytic, numeric)
};

std::pair<Eigen::VectorXd, Eigen::VectorXd> check_detection_loss(Rng& rng,
                                                                 const DetLossWeights& weights) {
  constexpr int kClassCount = 3;
  RoiConfig roi;
  const int box_count = rng.uniform_int(1, 6);
  std::vector<std::pair<OrientedBox3D, int>> boxes;
  for (int i = 0; i < box_count; ++i) {
    OrientedBox3D box;
    box.center = Eigen::Vector3d(rng.uniform(5.0, 65.0), rng.uniform(-20.0, 20.0), rng.uniform(-1.5, 0.5));
    box.length = rng.uniform(2.5, 5.0);
    box.width = rng.uniform(1.4, 2.2);
    box.height = rng.uniform(1.2, 2.0);
    box.yaw = rng.uniform(-M_PI, M_PI);
    boxes.emplace_back(box, rng.uniform_int(0, kClassCount - 1));
  }
  const TargetTensor gt = encode_targets(boxes, roi, kClassCount);
  TargetTensor pred = gt;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    pred.data()[i] += rng.uniform(-0.3, 0.3);
  }
  const Eigen::VectorXd analytic = loss_detection_total(pred, gt, weights).gradient;
  const auto f = [&gt, &weights](const Eigen::VectorXd& x) {
    TargetTensor probe(gt.class_count());
    probe.data() = x;
    return loss_detection_total(probe, gt, weights).total;
  };
  return {analytic, finite_diff_gradient(f, pred.data())};
}

std::string format_row(const GradCheckRow& row) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "  %-12s trials=%-3d max_rel_err=%.3e  %s\n", row.name.c_str(),
                row.trials, row.max_rel_error, row.passed ? "ok" : "FAIL");
  return buf;
}

}  // namespace

GradCheckReport run_gradient_certification(std::uint64_t seed, int trials, double tolerance) {
  const Index pixels = kImageHeight * kImageWidth;

  std::vector<LossCheck> checks;

  checks.push_back({"loss_conf", [](Rng& rng) {
                      DetLossWeights w{1.0, 0.0, 0.0, 0.0, 1e-6};
                      return check_detection_loss(rng, w);
                    }});
  checks.push_back({"loss_pose", [](Rng& rng) {
                      DetLossWeights w{0.0, 1.0, 0.0, 0.0, 1e-6};
                      return check_detection_loss(rng, w);
                    }});
  checks.push_back({"loss_class", [](Rng& rng) {
                      DetLossWeights w{0.0, 0.0, 1.0, 0.0, 1e-6};
                      return check_detection_loss(rng, w);
                    }});

  checks.push_back({"loss_smooth", [pixels](Rng& rng) {
                      const ImageGrid img = random_image(rng, kImageHeight, kImageWidth, 3);
                      const EdgeParams zero;
                      DepthMap depth(kImageHeight, kImageWidth, 1);
                      do {
                        for (Index r = 0; r < kImageHeight; ++r) {
                          for (Index c = 0; c < kImageWidth; ++c) {
                            depth(r, c) = rng.uniform(5.0, 60.0);
                          }
                        }
                      } while (!depth_margins_ok(depth, img, zero, EdgeVariant::DxDy));
                      const SmoothLoss loss = loss_smooth_grad(depth, img);
                      const auto f = [&img](const Eigen::VectorXd& x) {
                        return loss_smooth(ImageGrid::from_vector(kImageHeight, kImageWidth, 1, x), img);
                      };
                      return std::make_pair(loss.depth_grad.to_vector(),
                                            finite_diff_gradient(f, depth.to_vector()));
                    }});

  const auto edge_check = [pixels](Rng& rng, bool eps_form) {
    const EdgeVariant variant = eps_form ? EdgeVariant::DxDx : EdgeVariant::DxDy;
    const double beta = eps_form ? 0.5 : 1.0;
    const ImageGrid img = random_image(rng, kImageHeight, kImageWidth, 3);
    EdgeParams params = random_params(rng);
    DepthMap depth(kImageHeight, kImageWidth, 1);
    do {
      depth = random_band_depth(rng, kImageHeight, kImageWidth);
    } while (!depth_margins_ok(depth, img, params, variant));
    const EdgeLoss loss = eps_form ? loss_eps_grad(depth, img, params, beta, variant)
                                   : loss_edge_preservance_grad(depth, img, params, variant);
    Eigen::VectorXd analytic(pixels + 4);
    analytic.segment(0, pixels) = loss.depth_grad.to_vector();
    analytic.segment(pixels, 4) = loss.param_grad.as_vector();
    const auto f = [&img, beta, variant, eps_form, pixels](const Eigen::VectorXd& x) {
      const DepthMap d = ImageGrid::from_vector(kImageHeight, kImageWidth, 1, x.segment(0, pixels));
      const EdgeParams p = EdgeParams::from_vector(x.segment(pixels, 4));
      return eps_form ? loss_eps(d, img, p, beta, variant)
                      : loss_edge_preservance(d, img, p, variant);
    };
    Eigen::VectorXd x(pixels + 4);
    x.segment(0, pixels) = depth.to_vector();
    x.segment(pixels, 4) = params.as_vector();
    return std::make_pair(analytic, finite_diff_gradient(f, x));
  };
  checks.push_back({"loss_ep", [edge_check](Rng& rng) { return edge_check(rng, false); }});
  checks.push_back({"loss_eps", [edge_check](Rng& rng) { return edge_check(rng, true); }});

  checks.push_back({"loss_repr", [pixels](Rng& rng) {
                      const StereoFixture fx = make_stereo_fixture(rng, EdgeVariant::DxDy);
                      const bool cross = rng.uniform_int(0, 1) == 1;
                      const PairLoss loss =
                          loss_reprojection_grad(fx.pair, fx.depth_l, fx.depth_r, 1.0, 0.1, 100.0, cross);
                      Eigen::VectorXd analytic(2 * pixels);
                      analytic.segment(0, pixels) = loss.depth_l_grad.to_vector();
                      analytic.segment(pixels, pixels) = loss.depth_r_grad.to_vector();
                      const auto f = [&fx, cross, pixels](const Eigen::VectorXd& x) {
                        const DepthMap dl =
                            ImageGrid::from_vector(kImageHeight, kImageWidth, 1, x.segment(0, pixels));
                        const DepthMap dr =
                            ImageGrid::from_vector(kImageHeight, kImageWidth, 1, x.segment(pixels, pixels));
                        return loss_reprojection(fx.pair, dl, dr, 1.0, 0.1, 100.0, cross);
                      };
                      Eigen::VectorXd x(2 * pixels);
                      x.segment(0, pixels) = fx.depth_l.to_vector();
                      x.segment(pixels, pixels) = fx.depth_r.to_vector();
                      return std::make_pair(analytic, finite_diff_gradient(f, x));
                    }});

  checks.push_back({"loss_cons", [pixels](Rng& rng) {
                      ImageGrid disp_l2r(kImageHeight, kImageWidth, 1);
                      ImageGrid disp_r2l(kImageHeight, kImageWidth, 1);
                      bool ok = false;
                      while (!ok) {
                        for (Index r = 0; r < kImageHeight; ++r) {
                          for (Index c = 0; c < kImageWidth; ++c) {
                            disp_l2r(r, c) = rng.uniform(0.5, 3.5);
                            disp_r2l(r, c) = -rng.uniform(0.5, 3.5);
                          }
                        }
                        ok = cons_margins_ok(disp_l2r.plane(0), -disp_r2l.plane(0), 1.0);
                      }
                      const ConsistencyLoss loss = loss_disp_consistency_grad(disp_l2r, disp_r2l, 1.0);
                      Eigen::VectorXd analytic(2 * pixels);
                      analytic.segment(0, pixels) = loss.disp_l2r_grad.to_vector();
                      analytic.segment(pixels, pixels) = loss.disp_r2l_grad.to_vector();
                      const auto f = [pixels](const Eigen::VectorXd& x) {
                        const ImageGrid a =
                            ImageGrid::from_vector(kImageHeight, kImageWidth, 1, x.segment(0, pixels));
                        const ImageGrid b =
                            ImageGrid::from_vector(kImageHeight, kImageWidth, 1, x.segment(pixels, pixels));
                        return loss_disp_consistency(a, b, 1.0);
                      };
                      Eigen::VectorXd x(2 * pixels);
                      x.segment(0, pixels) = disp_l2r.to_vector();
                      x.segment(pixels, pixels) = disp_r2l.to_vector();
                      return std::make_pair(analytic, finite_diff_gradient(f, x));
                    }});

  checks.push_back({"loss_app", [pixels](Rng& rng) {
                      const StereoFixture fx = make_stereo_fixture(rng, EdgeVariant::DxDy);
                      const double alpha = rng.uniform(0.2, 0.8);
                      const PairLoss loss = loss_appearance_grad(fx.pair, fx.depth_l, fx.depth_r, alpha,
                                                                 1.0, 0.1, 100.0, false);
                      Eigen::VectorXd analytic(2 * pixels);
                      analytic.segment(0, pixels) = loss.depth_l_grad.to_vector();
                      analytic.segment(pixels, pixels) = loss.depth_r_grad.to_vector();
                      const auto f = [&fx, alpha, pixels](const Eigen::VectorXd& x) {
                        const DepthMap dl =
                            ImageGrid::from_vector(kImageHeight, kImageWidth, 1, x.segment(0, pixels));
                        const DepthMap dr =
                            ImageGrid::from_vector(kImageHeight, kImageWidth, 1, x.segment(pixels, pixels));
                        return loss_appearance(fx.pair, dl, dr, alpha, 1.0, 0.1, 100.0, false);
                      };
                      Eigen::VectorXd x(2 * pixels);
                      x.segment(0, pixels) = fx.depth_l.to_vector();
                      x.segment(pixels, pixels) = fx.depth_r.to_vector();
                      return std::make_pair(analytic, finite_diff_gradient(f, x));
                    }});

  checks.push_back({"loss_unsup", [pixels](Rng& rng) {
                      const EdgeVariant variant =
                          rng.uniform_int(0, 1) == 1 ? EdgeVariant::DxDx : EdgeVariant::DxDy;
                      const StereoFixture fx = make_stereo_fixture(rng, variant);
                      DepthLossWeights weights;
                      weights.lambda_eps = rng.uniform(0.1, 2.0);
                      weights.lambda_repr = rng.uniform(0.1, 2.0);
                      weights.lambda_cons = rng.uniform(0.1, 2.0);
                      weights.lambda_app = rng.uniform(0.1, 2.0);
                      weights.beta_edge = rng.uniform(0.2, 0.8);
                      weights.alpha_ssim = rng.uniform(0.2, 0.8);
                      weights.edge_variant = variant;
                      const DepthLossReport report =
                          loss_depth_unsup(fx.pair, fx.depth_l, fx.depth_r, fx.pair.left, fx.params, weights);
                      Eigen::VectorXd analytic(2 * pixels + 4);
                      analytic.segment(0, pixels) = report.depth_l_grad.to_vector();
                      analytic.segment(pixels, pixels) = report.depth_r_grad.to_vector();
                      analytic.segment(2 * pixels, 4) = report.param_grad.as_vector();
                      const auto f = [&fx, &weights, pixels](const Eigen::VectorXd& x) {
                        const DepthMap dl =
                            ImageGrid::from_vector(kImageHeight, kImageWidth, 1, x.segment(0, pixels));
                        const DepthMap dr =
                            ImageGrid::from_vector(kImageHeight, kImageWidth, 1, x.segment(pixels, pixels));
                        const EdgeParams p = EdgeParams::from_vector(x.segment(2 * pixels, 4));
                        return loss_depth_unsup(fx.pair, dl, dr, fx.pair.left, p, weights).total;
                      };
                      return std::make_pair(analytic,
                                            finite_diff_gradient(f, pack_pair(fx.depth_l, fx.depth_r,
                                                                              fx.params)));
                    }});

  checks.push_back({"loss_sup", [pixels](Rng& rng) {
                      DepthMap depth(kImageHeight, kImageWidth, 1);
                      for (Index r = 0; r < kImageHeight; ++r) {
                        for (Index c = 0; c < kImageWidth; ++c) {
                          depth(r, c) = rng.uniform(5.0, 60.0);
                        }
                      }
                      std::vector<ProjectedPoint> projected;
                      const int count = rng.uniform_int(1, 12);
                      for (int i = 0; i < count; ++i) {
                        ProjectedPoint p;
                        p.pixel_u = rng.uniform_int(0, static_cast<int>(kImageWidth) - 1);
                        p.pixel_v = rng.uniform_int(0, static_cast<int>(kImageHeight) - 1);
                        p.u = p.pixel_u;
                        p.v = p.pixel_v;
                        p.depth = rng.uniform(5.0, 60.0);
                        projected.push_back(p);
                      }
                      const double lambda = rng.uniform(0.2, 2.0);
                      const int epoch = rng.uniform_int(0, 20);
                      const SupervisedLoss loss = loss_depth_sup_grad(depth, projected, lambda, epoch, 0.01);
                      const auto f = [&projected, lambda, epoch](const Eigen::VectorXd& x) {
                        return loss_depth_sup(ImageGrid::from_vector(kImageHeight, kImageWidth, 1, x),
                                              projected, lambda, epoch, 0.01);
                      };
                      return std::make_pair(loss.depth_grad.to_vector(),
                                            finite_diff_gradient(f, depth.to_vector()));
                    }});

  GradCheckReport report;
  report.tolerance = tolerance;
  report.all_passed = true;
  std::uint64_t stream = 0;
  for (const LossCheck& check : checks) {
    Rng rng(seed ^ (0x9e3779b97f4a7c15ULL * ++stream));
    GradCheckRow row;
    row.name = check.name;
    row.trials = trials;
    for (int t = 0; t < trials; ++t) {
      const auto [analytic, numeric] = check.run(rng);
      row.max_rel_error = std::max(row.max_rel_error, max_relative_error(analytic, numeric));
    }
    row.passed = row.max_rel_error < tolerance;
    report.all_passed = report.all_passed && row.passed;
    report.rows.push_back(row);
  }
  return report;
}

std::string format_gradcheck_table(const GradCheckReport& report) {
  std::ostringstream out;
  out << "gradient certification (tolerance " << report.tolerance << ")\n";
  for (const GradCheckRow& row : report.rows) {
    out << format_row(row);
  }
  out << (report.all_passed ? "all gradients certified\n" : "certification FAILED\n");
  return out.str();
}

}  // namespace vr3dense
