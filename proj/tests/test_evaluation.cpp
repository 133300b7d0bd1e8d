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

#include "oracles.hpp"
#include "vr3dense/evaluation.hpp"

using namespace vr3dense;

namespace {

OrientedBox3D make_box(double x, double y, double z, double l, double w, double h, double yaw) {
  OrientedBox3D box;
  box.center = Eigen::Vector3d(x, y, z);
  box.length = l;
  box.width = w;
  box.height = h;
  box.yaw = yaw;
  return box;
}

Detection det_for(const OrientedBox3D& box, double confidence, int class_id = 0) {
  Detection det;
  det.box = box;
  det.confidence = confidence;
  det.class_id = class_id;
  return det;
}

/// Random detection/ground-truth instance: some detections are jittered
/// copies of ground truth, some are pure noise.
std::pair<std::vector<Detection>, std::vector<OrientedBox3D>> random_instance(Rng& rng) {
  std::vector<OrientedBox3D> gts;
  const int gt_count = rng.uniform_int(1, 8);
  for (int i = 0; i < gt_count; ++i) {
    gts.push_back(oracles::random_roi_box(rng));
  }
  std::vector<Detection> dets;
  const int det_count = rng.uniform_int(0, 12);
  for (int i = 0; i < det_count; ++i) {
    OrientedBox3D box;
    if (rng.unit() < 0.6) {
      box = gts[static_cast<std::size_t>(rng.uniform_int(0, gt_count - 1))];
      box.center += Eigen::Vector3d(rng.uniform(-1.0, 1.0), rng.uniform(-0.6, 0.6), 0.0);
      box.yaw += rng.uniform(-0.3, 0.3);
    } else {
      box = oracles::random_roi_box(rng);
    }
    dets.push_back(det_for(box, rng.uniform(0.05, 1.0)));
  }
  return {dets, gts};
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("depth_metrics") {
  SUBCASE("perfect prediction") {
    DepthMap pred = ImageGrid::constant(4, 4, 1, 10.0);
    const std::vector<DepthSample> gt = {{0, 0, 10.0}, {1, 2, 10.0}};
    const DepthMetrics m = depth_metrics(pred, gt, 0.0, 50.0);
    CHECK(m.abs_rel == 0.0);
    CHECK(m.sq_rel == 0.0);
    CHECK(m.rmse == 0.0);
    CHECK(m.rmse_log == 0.0);
    CHECK(m.delta1 == 1.0);
    CHECK(m.delta2 == 1.0);
    CHECK(m.delta3 == 1.0);
  }
  SUBCASE("single sample gt 10 pred 12") {
    DepthMap pred = ImageGrid::constant(2, 2, 1, 12.0);
    const DepthMetrics m = depth_metrics(pred, {{0, 0, 10.0}}, 0.0, 50.0);
    CHECK(m.abs_rel == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(m.sq_rel == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(m.rmse == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(m.rmse_log == doctest::Approx(0.1823215568).epsilon(1e-5));
    CHECK(m.delta1 == 1.0);  // ratio 1.2 < 1.25
    CHECK(m.delta2 == 1.0);
    CHECK(m.delta3 == 1.0);
  }
  SUBCASE("samples outside the range are excluded") {
    DepthMap pred = ImageGrid::constant(2, 2, 1, 12.0);
    const DepthMetrics m = depth_metrics(pred, {{0, 0, 10.0}, {1, 1, 60.0}}, 0.0, 50.0);
    CHECK(m.sample_count == 1);
    CHECK(m.abs_rel == doctest::Approx(0.2).epsilon(1e-12));
  }
  SUBCASE("an empty valid set is an evaluation error") {
    DepthMap pred = ImageGrid::constant(2, 2, 1, 12.0);
    CHECK_THROWS_AS(depth_metrics(pred, {{0, 0, 60.0}}, 0.0, 50.0), EvaluationError);
  }
  SUBCASE("deltas are nested") {
    Rng rng(81);
    DepthMap pred(6, 6, 1);
    std::vector<DepthSample> gt;
    for (Index r = 0; r < 6; ++r) {
      for (Index c = 0; c < 6; ++c) {
        pred(r, c) = rng.uniform(1.0, 60.0);
        gt.push_back({static_cast<int>(c), static_cast<int>(r), rng.uniform(1.0, 60.0)});
      }
    }
    const DepthMetrics m = depth_metrics(pred, gt, 0.0, 70.0);
    CHECK(m.delta1 <= m.delta2);
    CHECK(m.delta2 <= m.delta3);
  }
  SUBCASE("predictions clamp to the floor before evaluation") {
    DepthMap pred = ImageGrid::constant(1, 1, 1, 0.0);  // clamped to 0.1
    const DepthMetrics m = depth_metrics(pred, {{0, 0, 10.0}}, 0.0, 50.0);
    CHECK(m.abs_rel == doctest::Approx(0.99).epsilon(1e-12));
  }
}

TEST_CASE("average_precision_40") {
  const OrientedBox3D a = make_box(10, 0, 0, 4, 2, 1.5, 0.0);
  const OrientedBox3D b = make_box(30, 5, 0, 4, 2, 1.5, 0.3);
  SUBCASE("a perfect detector scores 1") {
    const PrCurve curve = average_precision_40({det_for(a, 0.9), det_for(b, 0.8)}, {a, b}, 0.5);
    CHECK(curve.ap == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("no detections score 0") {
    CHECK(average_precision_40({}, {a, b}, 0.5).ap == 0.0);
  }
  SUBCASE("no ground truth is an evaluation error") {
    CHECK_THROWS_AS(average_precision_40({det_for(a, 0.9)}, {}, 0.5), EvaluationError);
  }
  SUBCASE("the worked TP/FP/TP sequence gives exactly 5/6") {
    const OrientedBox3D far_away = make_box(60, -15, 0, 4, 2, 1.5, 0.0);
    const std::vector<Detection> dets = {det_for(a, 0.9), det_for(far_away, 0.8), det_for(b, 0.7)};
    const PrCurve curve = average_precision_40(dets, {a, b}, 0.5);
    CHECK(curve.ap == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(curve.precisions[0] == 1.0);
    CHECK(curve.precisions[39] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("matches the brute-force oracle on random instances") {
    Rng rng(82);
    for (int i = 0; i < 30; ++i) {
      const auto [dets, gts] = random_instance(rng);
      const double threshold = rng.uniform(0.2, 0.7);
      const PrCurve curve = average_precision_40(dets, gts, threshold);
      const double slow = oracles::brute_force_ap40(dets, gts, threshold);
      CHECK(curve.ap == doctest::Approx(slow).epsilon(1e-12));
      for (std::size_t k = 1; k < curve.precisions.size(); ++k) {
        CHECK(curve.precisions[k] <= curve.precisions[k - 1] + 1e-15);
      }
    }
  }
  SUBCASE("ap is monotone non-increasing in the IoU threshold") {
    Rng rng(83);
    for (int i = 0; i < 10; ++i) {
      const auto [dets, gts] = random_instance(rng);
      double previous = 1.0 + 1e-12;
      for (const double threshold : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const double ap = average_precision_40(dets, gts, threshold).ap;
        CHECK(ap <= previous + 1e-12);
        previous = ap;
      }
    }
  }
  SUBCASE("appending a lowest-confidence false positive never helps") {
    Rng rng(84);
    for (int i = 0; i < 10; ++i) {
      auto [dets, gts] = random_instance(rng);
      const double before = average_precision_40(dets, gts, 0.5).ap;
      dets.push_back(det_for(make_box(65, 20, 0, 4, 2, 1.5, 0.0), 0.01));
      const double after = average_precision_40(dets, gts, 0.5).ap;
      CHECK(after <= before + 1e-12);
    }
  }
  SUBCASE("duplicating a matched detection at lower confidence never helps") {
    const std::vector<Detection> dets = {det_for(a, 0.9), det_for(b, 0.8)};
    const double before = average_precision_40(dets, {a, b}, 0.5).ap;
    std::vector<Detection> with_dup = dets;
    with_dup.push_back(det_for(a, 0.3));
    CHECK(average_precision_40(with_dup, {a, b}, 0.5).ap <= before + 1e-12);
  }
}

TEST_CASE("map_multiclass") {
  const OrientedBox3D a = make_box(10, 0, 0, 4, 2, 1.5, 0.0);
  const OrientedBox3D b = make_box(30, 5, 0, 0.8, 0.6, 1.7, 0.3);
  SUBCASE("a single class reduces to AP") {
    const double ap = average_precision_40({det_for(a, 0.9)}, {a}, 0.5).ap;
    CHECK(map_multiclass({det_for(a, 0.9, 0)}, {{a, 0}}, 0.5) == doctest::Approx(ap).epsilon(1e-12));
  }
  SUBCASE("two classes average their APs") {
    // Class 0 detected perfectly, class 1 missed entirely.
    const double value = map_multiclass({det_for(a, 0.9, 0)}, {{a, 0}, {b, 1}}, 0.5);
    CHECK(value == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("no ground truth at all is an error") {
    CHECK_THROWS_AS(map_multiclass({det_for(a, 0.9, 0)}, {}, 0.5), EvaluationError);
  }
  SUBCASE("random three-class case matches the per-class oracle mean") {
    Rng rng(85);
    for (int i = 0; i < 10; ++i) {
      std::vector<std::pair<OrientedBox3D, int>> gts;
      std::vector<Detection> dets;
      for (int c = 0; c < 3; ++c) {
        auto [class_dets, class_gts] = random_instance(rng);
        for (const OrientedBox3D& box : class_gts) {
          gts.emplace_back(box, c);
        }
        for (Detection det : class_dets) {
          det.class_id = c;
          dets.push_back(det);
        }
      }
      double oracle = 0.0;
      for (int c = 0; c < 3; ++c) {
        std::vector<Detection> class_dets;
        std::vector<OrientedBox3D> class_gts;
        for (const Detection& det : dets) {
          if (det.class_id == c) {
            class_dets.push_back(det);
          }
        }
        for (const auto& [box, gc] : gts) {
          if (gc == c) {
            class_gts.push_back(box);
          }
        }
        oracle += oracles::brute_force_ap40(class_dets, class_gts, 0.4);
      }
      CHECK(map_multiclass(dets, gts, 0.4) == doctest::Approx(oracle / 3.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("collect_depth_samples skips zeros") {
  ImageGrid sparse(3, 3, 1);
  sparse(1, 2) = 7.5;
  sparse(2, 0) = 3.25;
  const auto samples = collect_depth_samples(sparse);
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].u == 2);
  CHECK(samples[0].v == 1);
  CHECK(samples[0].depth == 7.5);
}

}  // TEST_SUITE
