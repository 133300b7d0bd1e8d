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

#include <doctest.h>

#include <cmath>

#include "vr3dense/depth_losses.hpp"
#include "vr3dense/numerics.hpp"
#include "vr3dense/rng.hpp"
#include "vr3dense/synthetic.hpp"

using namespace vr3dense;

namespace {

ImageGrid ramp_image(Index h, Index w, double slope_x) {
  ImageGrid img(h, w, 1);
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      img(r, c) = slope_x * static_cast<double>(c);
    }
  }
  return img;
}

}  // namespace

TEST_SUITE("depth_losses") {

TEST_CASE("depth_to_disparity") {
  SUBCASE("uniform depth 50 with fb 100 gives disparity 2") {
    const DepthMap depth = ImageGrid::constant(4, 6, 1, 50.0);
    const ImageGrid disp = depth_to_disparity(depth, 100.0, 1.0, 0.1, 100.0);
    CHECK((disp.plane(0) == 2.0).all());
  }
  SUBCASE("depth clamps at the far bound") {
    DepthMap depth = ImageGrid::constant(2, 2, 1, 100.0);
    depth(0, 0) = 500.0;  // clamped to 100
    const ImageGrid disp = depth_to_disparity(depth, 100.0, 1.0, 0.1, 100.0);
    CHECK(disp(0, 0) == 1.0);
    CHECK(disp(1, 1) == 1.0);
  }
  SUBCASE("disparity -> depth -> disparity is the identity inside the clamp") {
    Rng rng(71);
    DepthMap depth(3, 5, 1);
    for (Index r = 0; r < 3; ++r) {
      for (Index c = 0; c < 5; ++c) {
        depth(r, c) = rng.uniform(5.0, 90.0);
      }
    }
    const ImageGrid disp = depth_to_disparity(depth, 100.0, 1.0, 0.1, 100.0);
    DepthMap back(3, 5, 1);
    back.plane(0) = 100.0 / disp.plane(0);
    const ImageGrid disp2 = depth_to_disparity(back, 100.0, 1.0, 0.1, 100.0);
    CHECK((disp.plane(0) - disp2.plane(0)).abs().maxCoeff() < 1e-12);
  }
  SUBCASE("non-positive fb is an error") {
    CHECK_THROWS_AS(depth_to_disparity(ImageGrid::constant(2, 2, 1, 10.0), 0.0, 1.0, 0.1, 100.0),
                    ParameterError);
  }
}

TEST_CASE("warp_image") {
  SUBCASE("zero disparity is the bitwise identity with a full mask") {
    Rng rng(72);
    ImageGrid src(5, 9, 3);
    for (Index c = 0; c < 3; ++c) {
      src.plane(c) = (Array2d::Random(5, 9) + 1.0) / 2.0;
    }
    const ImageGrid zero(5, 9, 1);
    const auto [warped, mask] = warp_image(src, zero, WarpDirection::LeftToRight);
    CHECK(warped == src);
    CHECK((mask.plane(0) == 1.0).all());
  }
  SUBCASE("integer disparity shifts a ramp by one pixel") {
    const ImageGrid src = ramp_image(3, 8, 1.0 / 8.0);
    const ImageGrid one = ImageGrid::constant(3, 8, 1, 1.0);
    const auto [warped, mask] = warp_image(src, one, WarpDirection::LeftToRight);
    for (Index r = 0; r < 3; ++r) {
      for (Index c = 0; c + 1 < 8; ++c) {
        CHECK(warped(r, c) == doctest::Approx(src(r, c + 1)).epsilon(1e-12));
        CHECK(mask(r, c) == 1.0);
      }
      CHECK(mask(r, 7) == 0.0);  // sample would land outside
    }
  }
  SUBCASE("half-pixel disparity linearly interpolates a linear ramp") {
    const ImageGrid src = ramp_image(2, 10, 0.1);
    const ImageGrid half = ImageGrid::constant(2, 10, 1, 0.5);
    const auto [warped, mask] = warp_image(src, half, WarpDirection::LeftToRight);
    for (Index c = 0; c + 1 < 10; ++c) {
      CHECK(warped(0, c) == doctest::Approx(0.1 * (c + 0.5)).epsilon(1e-12));
    }
    CHECK(mask(0, 9) == 0.0);
  }
  SUBCASE("direction flips the sampling side") {
    const ImageGrid src = ramp_image(2, 10, 0.1);
    const ImageGrid one = ImageGrid::constant(2, 10, 1, 1.0);
    const auto [warped, mask] = warp_image(src, one, WarpDirection::RightToLeft);
    CHECK(warped(0, 5) == doctest::Approx(src(0, 4)).epsilon(1e-12));
    CHECK(mask(0, 0) == 0.0);
  }
  SUBCASE("shape mismatch is an error") {
    CHECK_THROWS_AS(warp_image(ImageGrid(2, 4, 1), ImageGrid(2, 5, 1), WarpDirection::LeftToRight),
                    ParameterError);
  }
}

TEST_CASE("loss_smooth") {
  SUBCASE("constant depth scores zero") {
    CHECK(loss_smooth(ImageGrid::constant(6, 8, 1, 12.0), ImageGrid::constant(6, 8, 3, 0.4)) == 0.0);
  }
  SUBCASE("depth ramp under a constant image") {
    const Index h = 6, w = 8;
    const double slope = 0.7;
    const DepthMap depth = ramp_image(h, w, slope);
    const ImageGrid img = ImageGrid::constant(h, w, 3, 0.4);
    // Forward differences: (w-1) interior columns carry |slope|, the padded
    // last column carries zero, weights are e^0 = 1.
    const double expected = slope * static_cast<double>(w - 1) / static_cast<double>(w);
    CHECK(loss_smooth(depth, img) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("image gradients suppress the penalty") {
    const Index h = 6, w = 8;
    const DepthMap depth = ramp_image(h, w, 0.7);
    const ImageGrid flat = ImageGrid::constant(h, w, 3, 0.4);
    ImageGrid textured(h, w, 3);
    for (Index c = 0; c < 3; ++c) {
      textured.plane(c) = ramp_image(h, w, 0.09).plane(0);
    }
    CHECK(loss_smooth(depth, textured) < loss_smooth(depth, flat));
  }
}

TEST_CASE("loss_edge_preservance") {
  SUBCASE("depth gradients matching alpha-scaled image gradients score zero") {
    // With params zero, alpha = 0, so a constant depth map matches exactly.
    CHECK(loss_edge_preservance(ImageGrid::constant(5, 7, 1, 9.0), ImageGrid::constant(5, 7, 3, 0.3),
                                EdgeParams{}) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("unit x-ramp under zero params") {
    const Index h = 6, w = 8;
    const DepthMap depth = ramp_image(h, w, 1.0);
    const ImageGrid img = ImageGrid::constant(h, w, 3, 0.4);
    // Interior integrand (e^1 + e^0)/2, boundary column (e^0 + e^0)/2 = 1.
    const double interior = 0.5 * (std::exp(1.0) + 1.0);
    const double expected = ((w - 1) * interior + 1.0) / w - 1.0;
    CHECK(loss_edge_preservance(depth, img, EdgeParams{}) ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(0.8591409142295225 * (w - 1.0) / w).epsilon(1e-12));
  }
  SUBCASE("non-negative for random inputs") {
    Rng rng(73);
    for (int i = 0; i < 20; ++i) {
      DepthMap depth(4, 6, 1);
      ImageGrid img(4, 6, 3);
      for (Index r = 0; r < 4; ++r) {
        for (Index c = 0; c < 6; ++c) {
          depth(r, c) = rng.uniform(1.0, 40.0);
          for (Index ch = 0; ch < 3; ++ch) {
            img(r, c, ch) = rng.uniform(0.0, 1.0);
          }
        }
      }
      const EdgeParams params{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                              rng.uniform(-1, 1)};
      CHECK(loss_edge_preservance(depth, img, params) >= 0.0);
    }
  }
}

TEST_CASE("loss_eps blends the two regularizers") {
  const Index h = 6, w = 8;
  const DepthMap depth = ramp_image(h, w, 1.0);
  const ImageGrid img = ImageGrid::constant(h, w, 3, 0.4);
  const double smooth = loss_smooth(depth, img);
  const double edge = loss_edge_preservance(depth, img, EdgeParams{});
  CHECK(loss_eps(depth, img, EdgeParams{}, 0.0) == doctest::Approx(smooth).epsilon(1e-12));
  CHECK(loss_eps(depth, img, EdgeParams{}, 1.0) == doctest::Approx(edge).epsilon(1e-12));
  CHECK(loss_eps(depth, img, EdgeParams{}, 0.5) ==
        doctest::Approx(0.5 * (smooth + edge)).epsilon(1e-12));
  SUBCASE("linear in beta") {
    Rng rng(74);
    for (int i = 0; i < 5; ++i) {
      const double beta = rng.uniform(0.0, 1.0);
      CHECK(loss_eps(depth, img, EdgeParams{}, beta) ==
            doctest::Approx(beta * edge + (1.0 - beta) * smooth).epsilon(1e-12));
    }
  }
}

TEST_CASE("loss_disp_consistency") {
  const Index h = 4, w = 6;
  SUBCASE("consistent pair scores zero") {
    ImageGrid l2r = ImageGrid::constant(h, w, 1, 1.7);
    ImageGrid r2l = ImageGrid::constant(h, w, 1, -1.7);
    CHECK(loss_disp_consistency(l2r, r2l, 1.0) == 0.0);
  }
  SUBCASE("constant mismatch 0.5 gives huber(0.5)") {
    ImageGrid l2r = ImageGrid::constant(h, w, 1, 2.0);
    ImageGrid r2l = ImageGrid::constant(h, w, 1, -1.5);
    CHECK(loss_disp_consistency(l2r, r2l, 1.0) == doctest::Approx(0.125).epsilon(1e-12));
  }
  SUBCASE("constant mismatch 2 gives huber(2)") {
    ImageGrid l2r = ImageGrid::constant(h, w, 1, 3.0);
    ImageGrid r2l = ImageGrid::constant(h, w, 1, -1.0);
    CHECK(loss_disp_consistency(l2r, r2l, 1.0) == doctest::Approx(1.5).epsilon(1e-12));
  }
}

TEST_CASE("ssim") {
  SUBCASE("self-similarity is exactly 1") {
    Rng rng(75);
    ImageGrid img(5, 7, 3);
    for (Index c = 0; c < 3; ++c) {
      img.plane(c) = (Array2d::Random(5, 7) + 1.0) / 2.0;
    }
    const ImageGrid s = ssim(img, img);
    for (Index c = 0; c < 3; ++c) {
      CHECK((s.plane(c) - 1.0).abs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("flat equal patches stay 1 through the stabilizers") {
    const ImageGrid a = ImageGrid::constant(4, 4, 1, 0.5);
    const ImageGrid s = ssim(a, a);
    CHECK((s.plane(0) - 1.0).abs().maxCoeff() < 1e-12);
  }
  SUBCASE("an inverted checkerboard is negatively structured") {
    ImageGrid a(6, 6, 1);
    for (Index r = 0; r < 6; ++r) {
      for (Index c = 0; c < 6; ++c) {
        a(r, c) = ((r + c) % 2 == 0) ? 0.9 : 0.1;
      }
    }
    ImageGrid b(6, 6, 1);
    b.plane(0) = 1.0 - a.plane(0);
    const ImageGrid s = ssim(a, b);
    CHECK(s(3, 3) < 0.0);
    CHECK(s.plane(0).maxCoeff() <= 1.0 + 1e-12);
    CHECK(s.plane(0).minCoeff() >= -1.0 - 1e-12);
  }
}

TEST_CASE("reprojection on a constructed scene") {
  const SyntheticScene scene = make_smooth_scene(32, 64, 72.0, 1.0);
  SUBCASE("ground-truth depth explains the pair") {
    const double loss = loss_reprojection(scene.pair, scene.depth, scene.depth, 1.0, 0.1, 100.0);
    CHECK(loss < 1e-3);
    CHECK(loss >= 0.0);
  }
  SUBCASE("halving the depth strictly increases the loss") {
    DepthMap halved = scene.depth;
    halved.plane(0) *= 0.5;
    CHECK(loss_reprojection(scene.pair, halved, halved, 1.0, 0.1, 100.0) >
          10.0 * loss_reprojection(scene.pair, scene.depth, scene.depth, 1.0, 0.1, 100.0));
  }
  SUBCASE("identical images at the far clamp are almost free") {
    StereoPair pair;
    pair.left = scene.pair.left;
    pair.right = scene.pair.left;
    pair.focal = 2.0;
    pair.baseline = 1.0;
    const DepthMap far = ImageGrid::constant(32, 64, 1, 100.0);
    CHECK(loss_reprojection(pair, far, far, 1.0, 0.1, 100.0) < 1e-4);
  }
}

TEST_CASE("loss_appearance") {
  const SyntheticScene scene = make_smooth_scene(16, 32, 40.0, 1.0);
  SUBCASE("near-perfect reconstruction keeps the ssim part small") {
    const double app0 = loss_appearance(scene.pair, scene.depth, scene.depth, 1.0, 1.0, 0.1, 100.0);
    CHECK(app0 < 2e-2);  // pure ssim share, bilinear residue only
    CHECK(app0 >= 0.0);
  }
  SUBCASE("alpha 0 reduces to the reprojection loss") {
    const double repr = loss_reprojection(scene.pair, scene.depth, scene.depth, 1.0, 0.1, 100.0);
    CHECK(loss_appearance(scene.pair, scene.depth, scene.depth, 0.0, 1.0, 0.1, 100.0) ==
          doctest::Approx(repr).epsilon(1e-12));
  }
}

TEST_CASE("loss_depth_sup") {
  DepthMap depth = ImageGrid::constant(8, 8, 1, 10.0);
  std::vector<ProjectedPoint> points;
  ProjectedPoint p;
  p.pixel_u = 3;
  p.pixel_v = 2;
  p.depth = 10.0;
  points.push_back(p);
  SUBCASE("exact prediction scores zero") {
    CHECK(loss_depth_sup(depth, points, 1.0, 0, 0.01) == 0.0);
  }
  SUBCASE("no points score zero") { CHECK(loss_depth_sup(depth, {}, 1.0, 0, 0.01) == 0.0); }
  SUBCASE("single 2 m error at epoch 0 scores 4") {
    depth(2, 3) = 12.0;
    CHECK(loss_depth_sup(depth, points, 1.0, 0, 0.01) == doctest::Approx(4.0).epsilon(1e-12));
  }
  SUBCASE("each epoch multiplies by exp(-rate)") {
    depth(2, 3) = 12.0;
    for (int epoch = 0; epoch < 5; ++epoch) {
      const double now = loss_depth_sup(depth, points, 1.0, epoch, 0.01);
      const double next = loss_depth_sup(depth, points, 1.0, epoch + 1, 0.01);
      CHECK(next == doctest::Approx(now * std::exp(-0.01)).epsilon(1e-12));
    }
  }
}

TEST_CASE("loss_depth_unsup composition") {
  const SyntheticScene scene = make_smooth_scene(16, 32, 40.0, 1.0);
  const ImageGrid& img_l = scene.pair.left;
  SUBCASE("selector weights isolate the eps term") {
    DepthLossWeights weights;
    weights.lambda_eps = 1.0;
    weights.lambda_repr = 0.0;
    weights.lambda_cons = 0.0;
    weights.lambda_app = 0.0;
    const DepthLossReport report =
        loss_depth_unsup(scene.pair, scene.depth, scene.depth, img_l, EdgeParams{}, weights);
    CHECK(report.total == doctest::Approx(report.eps).epsilon(1e-12));
    CHECK(report.eps ==
          doctest::Approx(loss_eps(scene.depth, img_l, EdgeParams{}, weights.beta_edge))
              .epsilon(1e-12));
  }
  SUBCASE("zero weights zero the total and gradients") {
    DepthLossWeights weights;
    weights.lambda_eps = weights.lambda_repr = weights.lambda_cons = weights.lambda_app = 0.0;
    const DepthLossReport report =
        loss_depth_unsup(scene.pair, scene.depth, scene.depth, img_l, EdgeParams{}, weights);
    CHECK(report.total == 0.0);
    CHECK(report.depth_l_grad.plane(0).abs().maxCoeff() == 0.0);
    CHECK(report.depth_r_grad.plane(0).abs().maxCoeff() == 0.0);
  }
  SUBCASE("ground truth is near the minimum over depth rescalings") {
    DepthLossWeights weights;
    weights.lambda_eps = 1e-3;  // keep the regularizer from rewarding shrunken depth
    const auto total_at = [&](double scale) {
      DepthMap scaled = scene.depth;
      scaled.plane(0) *= scale;
      return loss_depth_unsup(scene.pair, scaled, scaled, img_l, EdgeParams{}, weights).total;
    };
    const double at_truth = total_at(1.0);
    for (const double scale : {0.9, 0.95, 1.05, 1.1}) {
      CHECK(at_truth < total_at(scale));
    }
  }
}

TEST_CASE("fit_depth_toy basics") {
  const SyntheticScene scene = make_smooth_scene(16, 32, 40.0, 1.0);
  DepthLossWeights weights;
  weights.lambda_eps = 1e-3;
  SUBCASE("zero learning rate is a no-op with a flat trace") {
    const FitResult result = fit_depth_toy(scene.pair, scene.depth, weights, EdgeParams{}, 5, 0.0);
    CHECK(result.depth_l == scene.depth);
    REQUIRE(result.trace.size() == 6);
    for (const double loss : result.trace) {
      CHECK(loss == result.trace.front());
    }
  }
  SUBCASE("starting at ground truth stays within 1% over 10 steps") {
    const FitResult result =
        fit_depth_toy(scene.pair, scene.depth, weights, EdgeParams{}, 10, 4e3);
    for (const double loss : result.trace) {
      CHECK(std::abs(loss - result.trace.front()) <= 0.01 * result.trace.front());
    }
  }
  SUBCASE("step count must be positive") {
    CHECK_THROWS_AS(fit_depth_toy(scene.pair, scene.depth, weights, EdgeParams{}, 0, 0.1),
                    ParameterError);
  }
}

TEST_CASE("analytic gradients match finite differences (spot checks)") {
  // The full 50-trial certification lives in the gradcheck module; this keeps
  // a small smoke version in the unit suite.
  Rng rng(76);
  const Index h = 5, w = 8;
  ImageGrid img(h, w, 3);
  for (Index c = 0; c < 3; ++c) {
    img.plane(c) = (Array2d::Random(h, w) * 0.4 + 0.5);
  }
  DepthMap depth(h, w, 1);
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      depth(r, c) = 25.0 + rng.uniform(-2.0, 2.0);
    }
  }
  SUBCASE("edge-preservance parameter gradient") {
    const EdgeParams params{0.3, -0.1, 0.2, 0.05};
    const EdgeLoss loss = loss_edge_preservance_grad(depth, img, params);
    const Index pixels = h * w;
    const auto f = [&](const Eigen::VectorXd& x) {
      return loss_edge_preservance(ImageGrid::from_vector(h, w, 1, x.segment(0, pixels)), img,
                                   EdgeParams::from_vector(x.segment(pixels, 4)));
    };
    Eigen::VectorXd x(pixels + 4);
    x.segment(0, pixels) = depth.to_vector();
    x.segment(pixels, 4) = params.as_vector();
    Eigen::VectorXd analytic(pixels + 4);
    analytic.segment(0, pixels) = loss.depth_grad.to_vector();
    analytic.segment(pixels, 4) = loss.param_grad.as_vector();
    CHECK(max_relative_error(analytic, finite_diff_gradient(f, x)) < 1e-4);
  }
}

}  // TEST_SUITE
