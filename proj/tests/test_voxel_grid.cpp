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

#include <algorithm>
#include <cmath>

#include "vr3dense/rng.hpp"
#include "vr3dense/voxel_grid.hpp"

using namespace vr3dense;

namespace {

/// Independent in-ROI counter: direct bound comparisons, no index math.
std::size_t count_in_roi(const PointCloud& cloud, const RoiConfig& roi) {
  std::size_t count = 0;
  for (const LidarPoint& p : cloud.points) {
    if (p.x >= roi.x_min && p.x < roi.x_max && p.y >= roi.y_min && p.y < roi.y_max &&
        p.z >= roi.z_min && p.z < roi.z_max) {
      ++count;
    }
  }
  return count;
}

PointCloud random_cloud(Rng& rng, std::size_t n) {
  PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    cloud.points.push_back({static_cast<float>(rng.uniform(-10.0, 80.0)),
                            static_cast<float>(rng.uniform(-30.0, 30.0)),
                            static_cast<float>(rng.uniform(-4.0, 2.0)),
                            static_cast<float>(rng.uniform(0.0, 1.0))});
  }
  return cloud;
}

}  // namespace

TEST_SUITE("voxel_grid") {

TEST_CASE("voxel_index maps the documented cases") {
  const RoiConfig roi;
  SUBCASE("interior point") {
    const auto idx = voxel_index(35.0, 0.0, -0.75, roi);
    REQUIRE(idx.has_value());
    CHECK((*idx)[0] == 128);
    CHECK((*idx)[1] == 128);
    CHECK((*idx)[2] == 8);
  }
  SUBCASE("ROI minimum corner") {
    const auto idx = voxel_index(0.0, -25.0, -2.5, roi);
    REQUIRE(idx.has_value());
    CHECK(*idx == std::array<int, 3>{0, 0, 0});
  }
  SUBCASE("outside the x range") { CHECK_FALSE(voxel_index(80.0, 0.0, 0.0, roi).has_value()); }
  SUBCASE("max boundary is excluded (half-open intervals)") {
    CHECK_FALSE(voxel_index(70.0, 0.0, 0.0, roi).has_value());
    CHECK_FALSE(voxel_index(35.0, 25.0, 0.0, roi).has_value());
  }
}

TEST_CASE("voxelize counts points") {
  const RoiConfig roi;
  SUBCASE("single point makes a single unit voxel") {
    PointCloud cloud;
    cloud.points.push_back({35.0f, 0.0f, -0.75f, 0.2f});
    const VoxelGrid grid = voxelize(cloud, roi);
    CHECK(grid.density.sum() == 1.0);
    CHECK(grid.at(128, 128, 8) == 1.0);
    CHECK((grid.density.array() != 0.0).count() == 1);
  }
  SUBCASE("repeated points accumulate") {
    PointCloud cloud;
    for (int i = 0; i < 10; ++i) {
      cloud.points.push_back({35.0f, 0.0f, -0.75f, 0.2f});
    }
    CHECK(voxelize(cloud, roi).at(128, 128, 8) == 10.0);
  }
  SUBCASE("conservation against the independent counter") {
    Rng rng(21);
    const PointCloud cloud = random_cloud(rng, 20000);
    const VoxelGrid grid = voxelize(cloud, roi);
    CHECK(grid.density.sum() == static_cast<double>(count_in_roi(cloud, roi)));
    CHECK((grid.density.array() >= 0.0).all());
  }
  SUBCASE("permutation invariance is bitwise") {
    Rng rng(22);
    PointCloud cloud = random_cloud(rng, 5000);
    const VoxelGrid grid = voxelize(cloud, roi);
    std::shuffle(cloud.points.begin(), cloud.points.end(), rng.engine());
    const VoxelGrid shuffled = voxelize(cloud, roi);
    CHECK(grid.density == shuffled.density);
  }
  SUBCASE("threaded result is bitwise identical to sequential") {
    Rng rng(23);
    const PointCloud cloud = random_cloud(rng, 30000);
    const VoxelGrid sequential = voxelize(cloud, roi, 1);
    const VoxelGrid threaded = voxelize(cloud, roi, 4);
    CHECK(sequential.density == threaded.density);
  }
  SUBCASE("perturbing a point inside its cell changes nothing") {
    Rng rng(24);
    PointCloud cloud = random_cloud(rng, 500);
    const VoxelGrid before = voxelize(cloud, roi);
    for (LidarPoint& p : cloud.points) {
      const auto idx = voxel_index(p.x, p.y, p.z, roi);
      if (!idx.has_value()) {
        continue;
      }
      // Nudge toward the cell center; stays within the half-open cell.
      const double cx = roi.x_min + ((*idx)[0] + 0.5) * roi.x_width();
      p.x = static_cast<float>(p.x + 0.25 * (cx - p.x));
    }
    CHECK(voxelize(cloud, roi).density == before.density);
  }
  SUBCASE("voxel_index is consistent with voxelize") {
    Rng rng(25);
    const PointCloud cloud = random_cloud(rng, 200);
    const VoxelGrid grid = voxelize(cloud, roi);
    for (const LidarPoint& p : cloud.points) {
      const auto idx = voxel_index(p.x, p.y, p.z, roi);
      if (idx.has_value()) {
        CHECK(grid.at((*idx)[0], (*idx)[1], (*idx)[2]) >= 1.0);
      }
    }
  }
}

TEST_CASE("normalize_density modes") {
  const RoiConfig roi;
  PointCloud cloud;
  for (int i = 0; i < 9; ++i) {
    cloud.points.push_back({35.0f, 0.0f, -0.75f, 0.0f});
  }
  const VoxelGrid grid = voxelize(cloud, roi);
  SUBCASE("raw is the identity") {
    CHECK(normalize_density(grid, DensityMode::Raw).density == grid.density);
  }
  SUBCASE("log1p of a zero count is zero, of 9 is ln 10") {
    const VoxelGrid logged = normalize_density(grid, DensityMode::Log1p);
    CHECK(logged.at(0, 0, 0) == 0.0);
    CHECK(logged.at(128, 128, 8) == doctest::Approx(2.302585093).epsilon(1e-9));
  }
  SUBCASE("binary flattens counts to occupancy") {
    const VoxelGrid binary = normalize_density(grid, DensityMode::Binary);
    CHECK(binary.at(128, 128, 8) == 1.0);
    CHECK(binary.density.sum() == 1.0);
  }
}

TEST_CASE("grid file round trip") {
  RoiConfig roi;
  roi.nx = 8;
  roi.ny = 8;
  roi.nz = 4;
  Rng rng(29);
  PointCloud cloud = random_cloud(rng, 3000);
  const VoxelGrid grid = voxelize(cloud, roi);
  const std::vector<std::uint8_t> bytes = write_voxel_grid(grid);
  const VoxelGrid back = read_voxel_grid(bytes);
  CHECK(back.config.nx == roi.nx);
  CHECK(back.config.x_max == roi.x_max);
  CHECK(back.density == grid.density);
  CHECK(write_voxel_grid(back) == bytes);
  SUBCASE("truncated payload is rejected") {
    std::vector<std::uint8_t> bad(bytes.begin(), bytes.end() - 4);
    CHECK_THROWS_AS(read_voxel_grid(bad), FormatError);
  }
}

}  // TEST_SUITE
