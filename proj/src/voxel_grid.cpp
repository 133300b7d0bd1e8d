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

#include "vr3dense/voxel_grid.hpp"

#include <cmath>
#include <cstring>
#include <thread>

namespace vr3dense {

namespace {

void append_le_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

std::uint32_t read_le_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::int32_t to_millimeters(double meters) {
  return static_cast<std::int32_t>(std::llround(meters * 1000.0));
}

}  // namespace

void RoiConfig::validate() const {
  if (!(x_max > x_min) || !(y_max > y_min) || !(z_max > z_min)) {
    throw ParameterError("RoiConfig: max must exceed min on every axis");
  }
  if (nx < 1 || ny < 1 || nz < 1) {
    throw ParameterError("RoiConfig: voxel dimensions must be at least 1");
  }
}

std::optional<std::array<int, 3>> voxel_index(double x, double y, double z, const RoiConfig& config) {
  if (x < config.x_min || x >= config.x_max || y < config.y_min || y >= config.y_max ||
      z < config.z_min || z >= config.z_max) {
    return std::nullopt;
  }
  const int ix = static_cast<int>(std::floor((x - config.x_min) / config.x_width()));
  const int iy = static_cast<int>(std::floor((y - config.y_min) / config.y_width()));
  const int iz = static_cast<int>(std::floor((z - config.z_min) / config.z_width()));
  // floor((max - eps - min)/width) can hit n when eps underflows the division.
  return std::array<int, 3>{std::min(ix, config.nx - 1), std::min(iy, config.ny - 1),
                            std::min(iz, config.nz - 1)};
}

VoxelGrid voxelize(const PointCloud& cloud, const RoiConfig& config, int threads) {
  config.validate();
  if (threads < 1) {
    throw ParameterError("voxelize: thread count must be at least 1");
  }
  const std::int64_t voxels = config.voxel_count();

  auto accumulate = [&config, &cloud](std::size_t begin, std::size_t end,
                                      std::vector<std::uint32_t>& counts) {
    for (std::size_t i = begin; i < end; ++i) {
      const LidarPoint& p = cloud.points[i];
      const auto idx = voxel_index(p.x, p.y, p.z, config);
      if (idx.has_value()) {
        const std::int64_t flat =
            (static_cast<std::int64_t>((*idx)[0]) * config.ny + (*idx)[1]) * config.nz + (*idx)[2];
        ++counts[static_cast<std::size_t>(flat)];
      }
    }
  };

  std::vector<std::uint32_t> total(static_cast<std::size_t>(voxels), 0);
  if (threads == 1 || cloud.points.size() < 1024) {
    accumulate(0, cloud.points.size(), total);
  } else {
    std::vector<std::vector<std::uint32_t>> partials(
        static_cast<std::size_t>(threads), std::vector<std::uint32_t>(static_cast<std::size_t>(voxels), 0));
    std::vector<std::thread> workers;
    const std::size_t chunk = (cloud.points.size() + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const std::size_t begin = std::min(cloud.points.size(), static_cast<std::size_t>(t) * chunk);
      const std::size_t end = std::min(cloud.points.size(), begin + chunk);
      workers.emplace_back(accumulate, begin, end, std::ref(partials[static_cast<std::size_t>(t)]));
    }
    for (std::thread& w : workers) {
      w.join();
    }
    // Integer merge in fixed thread order: commutative, so bitwise stable.
    for (const auto& partial : partials) {
      for (std::size_t i = 0; i < total.size(); ++i) {
        total[i] += partial[i];
      }
    }
  }

  VoxelGrid grid;
  grid.config = config;
  grid.density.resize(voxels);
  for (std::int64_t i = 0; i < voxels; ++i) {
    grid.density[i] = static_cast<double>(total[static_cast<std::size_t>(i)]);
  }
  return grid;
}

VoxelGrid normalize_density(const VoxelGrid& grid, DensityMode mode) {
  VoxelGrid out = grid;
  switch (mode) {
    case DensityMode::Raw:
      break;
    case DensityMode::Log1p:
      out.density = grid.density.array().log1p();
      break;
    case DensityMode::Binary:
      out.density = (grid.density.array() > 0.0).cast<double>();
      break;
  }
  return out;
}

std::vector<std::uint8_t> write_voxel_grid(const VoxelGrid& grid) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(36 + static_cast<std::size_t>(grid.density.size()) * 4);
  append_le_u32(bytes, static_cast<std::uint32_t>(grid.config.nx));
  append_le_u32(bytes, static_cast<std::uint32_t>(grid.config.ny));
  append_le_u32(bytes, static_cast<std::uint32_t>(grid.config.nz));
  append_le_u32(bytes, static_cast<std::uint32_t>(to_millimeters(grid.config.x_min)));
  append_le_u32(bytes, static_cast<std::uint32_t>(to_millimeters(grid.config.x_max)));
  append_le_u32(bytes, static_cast<std::uint32_t>(to_millimeters(grid.config.y_min)));
  append_le_u32(bytes, static_cast<std::uint32_t>(to_millimeters(grid.config.y_max)));
  append_le_u32(bytes, static_cast<std::uint32_t>(to_millimeters(grid.config.z_min)));
  append_le_u32(bytes, static_cast<std::uint32_t>(to_millimeters(grid.config.z_max)));
  for (Eigen::Index i = 0; i < grid.density.size(); ++i) {
    const float v = static_cast<float>(grid.density[i]);
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    append_le_u32(bytes, bits);
  }
  return bytes;
}

VoxelGrid read_voxel_grid(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 36) {
    throw FormatError("voxel grid: truncated header");
  }
  VoxelGrid grid;
  grid.config.nx = static_cast<int>(read_le_u32(bytes.data()));
  grid.config.ny = static_cast<int>(read_le_u32(bytes.data() + 4));
  grid.config.nz = static_cast<int>(read_le_u32(bytes.data() + 8));
  grid.config.x_min = static_cast<std::int32_t>(read_le_u32(bytes.data() + 12)) / 1000.0;
  grid.config.x_max = static_cast<std::int32_t>(read_le_u32(bytes.data() + 16)) / 1000.0;
  grid.config.y_min = static_cast<std::int32_t>(read_le_u32(bytes.data() + 20)) / 1000.0;
  grid.config.y_max = static_cast<std::int32_t>(read_le_u32(bytes.data() + 24)) / 1000.0;
  grid.config.z_min = static_cast<std::int32_t>(read_le_u32(bytes.data() + 28)) / 1000.0;
  grid.config.z_max = static_cast<std::int32_t>(read_le_u32(bytes.data() + 32)) / 1000.0;
  grid.config.validate();
  const std::int64_t voxels = grid.config.voxel_count();
  if (bytes.size() != 36 + static_cast<std::size_t>(voxels) * 4) {
    throw FormatError("voxel grid: payload size does not match header");
  }
  grid.density.resize(voxels);
  for (std::int64_t i = 0; i < voxels; ++i) {
    const std::uint32_t bits = read_le_u32(bytes.data() + 36 + i * 4);
    float v;
    std::memcpy(&v, &bits, sizeof(v));
    grid.density[i] = static_cast<double>(v);
  }
  return grid;
}

}  // namespace vr3dense
