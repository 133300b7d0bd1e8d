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

#include <cstdint>
#include <string>
#include <vector>

#include "vr3dense/depth_losses.hpp"
#include "vr3dense/detection_losses.hpp"
#include "vr3dense/voxel_grid.hpp"

namespace vr3dense {

/// Everything a run needs, loadable from a single JSON file. Unknown keys are
/// a load error so typos never fall back to defaults silently.
struct RunConfig {
  RoiConfig roi;
  DetLossWeights det_weights;
  DepthLossWeights depth_weights;
  DensityMode density_mode = DensityMode::Raw;
  double nms_iou = 0.1;
  double conf_threshold = 0.5;
  std::uint64_t seed = 42;
  std::vector<std::string> classes = {"Car", "Pedestrian", "Cyclist"};
  double baseline_default = kDefaultStereoBaseline;

  void validate() const;

  /// Index of a class name, or -1 when the class is not evaluated.
  int class_id(const std::string& name) const;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Canonical JSON rendering (sorted keys) of the resolved configuration.
std::string config_to_json(const RunConfig& config);

/// FNV-1a hash of the canonical rendering, as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace vr3dense
