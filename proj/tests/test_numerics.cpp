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

#include "vr3dense/numerics.hpp"
#include "vr3dense/rng.hpp"

using namespace vr3dense;

TEST_SUITE("numerics") {

TEST_CASE("huber values") {
  CHECK(huber(0.0, 1.0) == 0.0);
  CHECK(huber(0.5, 1.0) == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(huber(2.0, 1.0) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK_THROWS_AS(huber(1.0, 0.0), ParameterError);
  CHECK_THROWS_AS(huber(1.0, -1.0), ParameterError);
}

TEST_CASE("huber symmetry and breakpoint continuity") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const double r = rng.uniform(-5.0, 5.0);
    const double delta = rng.uniform(0.1, 3.0);
    CHECK(huber(r, delta) == huber(-r, delta));
    CHECK(huber_derivative(r, delta) == -huber_derivative(-r, delta));
  }
  // Both branches agree exactly at |r| = delta.
  for (const double delta : {0.5, 1.0, 2.0}) {
    const double quadratic = 0.5 * delta * delta;
    const double linear = delta * (delta - 0.5 * delta);
    CHECK(quadratic == linear);
    CHECK(huber(delta, delta) == quadratic);
  }
}

TEST_CASE("image gradients on constant and ramp images") {
  const Index h = 5, w = 8;
  SUBCASE("constant image") {
    const ImageGrid img = ImageGrid::constant(h, w, 1, 0.7);
    const auto [dx, dy] = image_gradients(img);
    CHECK((dx.plane(0) == 0.0).all());
    CHECK((dy.plane(0) == 0.0).all());
  }
  SUBCASE("horizontal ramp") {
    ImageGrid img(h, w, 1);
    for (Index r = 0; r < h; ++r) {
      for (Index c = 0; c < w; ++c) {
        img(r, c) = static_cast<double>(c) / static_cast<double>(w);
      }
    }
    const auto [dx, dy] = image_gradients(img);
    for (Index r = 0; r < h; ++r) {
      for (Index c = 0; c < w; ++c) {
        const double expected = c + 1 < w ? 1.0 / static_cast<double>(w) : 0.0;
        CHECK(dx(r, c) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(dy(r, c) == 0.0);
      }
    }
  }
  SUBCASE("vertical step") {
    ImageGrid img(h, w, 1);
    const Index step_row = 3;
    for (Index r = step_row; r < h; ++r) {
      for (Index c = 0; c < w; ++c) {
        img(r, c) = 1.0;
      }
    }
    const auto [dx, dy] = image_gradients(img);
    for (Index r = 0; r < h; ++r) {
      for (Index c = 0; c < w; ++c) {
        CHECK(dy(r, c) == (r == step_row - 1 ? 1.0 : 0.0));
      }
    }
    CHECK((dx.plane(0) == 0.0).all());
  }
  SUBCASE("degenerate dimension") {
    CHECK_THROWS_AS(image_gradients(ImageGrid(1, 4, 1)), ParameterError);
    CHECK_THROWS_AS(image_gradients(ImageGrid(4, 1, 1)), ParameterError);
  }
}

TEST_CASE("resize_nearest index mapping") {
  ImageGrid img(2, 2, 1);
  img(0, 0) = 1.0;
  img(0, 1) = 2.0;
  img(1, 0) = 3.0;
  img(1, 1) = 4.0;

  SUBCASE("identity") { CHECK(resize_nearest(img, 2, 2) == img); }
  SUBCASE("upsample replicates 2x2 blocks") {
    const ImageGrid up = resize_nearest(img, 4, 4);
    for (Index r = 0; r < 4; ++r) {
      for (Index c = 0; c < 4; ++c) {
        CHECK(up(r, c) == img(r / 2, c / 2));
      }
    }
  }
  SUBCASE("downsample samples source indices 0 and 2") {
    ImageGrid big(4, 4, 1);
    for (Index r = 0; r < 4; ++r) {
      for (Index c = 0; c < 4; ++c) {
        big(r, c) = static_cast<double>(10 * r + c);
      }
    }
    const ImageGrid down = resize_nearest(big, 2, 2);
    CHECK(down(0, 0) == 0.0);
    CHECK(down(0, 1) == 2.0);
    CHECK(down(1, 0) == 20.0);
    CHECK(down(1, 1) == 22.0);
  }
  SUBCASE("zero target dimension") {
    CHECK_THROWS_AS(resize_nearest(img, 0, 2), ParameterError);
  }
  SUBCASE("integer-scale round trip is identity") {
    Rng rng(3);
    ImageGrid noise(3, 5, 2);
    for (Index c = 0; c < 2; ++c) {
      noise.plane(c) = Array2d::Random(3, 5);
    }
    for (const Index scale : {2, 3}) {
      const ImageGrid up = resize_nearest(noise, 3 * scale, 5 * scale);
      CHECK(resize_nearest(up, 3, 5) == noise);
    }
  }
}

TEST_CASE("finite_diff_gradient oracle") {
  SUBCASE("sum of squares") {
    const auto f = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
    Eigen::VectorXd x(2);
    x << 1.0, 2.0;
    const Eigen::VectorXd grad = finite_diff_gradient(f, x, 1e-4);
    CHECK(grad[0] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(grad[1] == doctest::Approx(4.0).epsilon(1e-6));
  }
  SUBCASE("constant function") {
    const auto f = [](const Eigen::VectorXd&) { return 3.5; };
    const Eigen::VectorXd grad = finite_diff_gradient(f, Eigen::VectorXd::Zero(4), 1e-4);
    CHECK(grad.isZero());
  }
  SUBCASE("huber derivative inside the quadratic region") {
    const auto f = [](const Eigen::VectorXd& x) { return huber(x[0], 1.0); };
    Eigen::VectorXd x(1);
    x << 0.5;
    CHECK(finite_diff_gradient(f, x, 1e-4)[0] == doctest::Approx(0.5).epsilon(1e-6));
  }
  SUBCASE("non-finite evaluation names the coordinate") {
    const auto f = [](const Eigen::VectorXd& x) { return std::log(x[1]); };
    Eigen::VectorXd x(2);
    x << 1.0, 1e-9;
    CHECK_THROWS_WITH_AS(finite_diff_gradient(f, x, 1e-4), doctest::Contains("coordinate 1"),
                         OracleError);
  }
}

}  // TEST_SUITE
