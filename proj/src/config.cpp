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

#include "vr3dense/config.hpp"

#include <json.hpp>

#include <set>

#include "vr3dense/kitti_io.hpp"

namespace vr3dense {

namespace {

using nlohmann::json;

void check_known_keys(const json& node, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : node.items()) {
    if (known.count(key) == 0) {
      throw ConfigError("config: unknown key \"" + where + key + "\"");
    }
  }
}

template <typename T>
void read_if(const json& node, const char* key, T& out) {
  if (node.contains(key)) {
    out = node.at(key).get<T>();
  }
}

void read_range(const json& node, const char* key, double& lo, double& hi) {
  if (!node.contains(key)) {
    return;
  }
  const auto& pair = node.at(key);
  if (!pair.is_array() || pair.size() != 2) {
    throw ConfigError(std::string("config: \"") + key + "\" must be a [min, max] pair");
  }
  lo = pair[0].get<double>();
  hi = pair[1].get<double>();
}

DensityMode parse_density_mode(const std::string& text) {
  if (text == "raw") {
    return DensityMode::Raw;
  }
  if (text == "log1p") {
    return DensityMode::Log1p;
  }
  if (text == "binary") {
    return DensityMode::Binary;
  }
  throw ConfigError("config: unknown density_mode \"" + text + "\"");
}

std::string density_mode_name(DensityMode mode) {
  switch (mode) {
    case DensityMode::Raw:
      return "raw";
    case DensityMode::Log1p:
      return "log1p";
    case DensityMode::Binary:
      return "binary";
  }
  return "raw";
}

EdgeVariant parse_edge_variant(const std::string& text) {
  if (text == "dx_dy") {
    return EdgeVariant::DxDy;
  }
  if (text == "dx_dx") {
    return EdgeVariant::DxDx;
  }
  throw ConfigError("config: unknown edge_variant \"" + text + "\"");
}

}  // namespace

void RunConfig::validate() const {
  roi.validate();
  if (!(det_weights.epsilon > 0.0)) {
    throw ConfigError("config: detection.epsilon must be positive");
  }
  if (det_weights.lambda_conf < 0.0 || det_weights.lambda_pose < 0.0 ||
      det_weights.lambda_class < 0.0 || det_weights.lambda_giou < 0.0) {
    throw ConfigError("config: detection loss weights must be non-negative");
  }
  if (depth_weights.lambda_eps < 0.0 || depth_weights.lambda_repr < 0.0 ||
      depth_weights.lambda_cons < 0.0 || depth_weights.lambda_app < 0.0 ||
      depth_weights.lambda_sup < 0.0) {
    throw ConfigError("config: depth loss weights must be non-negative");
  }
  if (depth_weights.beta_edge < 0.0 || depth_weights.beta_edge > 1.0) {
    throw ConfigError("config: depth.beta_edge must lie in [0, 1]");
  }
  if (depth_weights.alpha_ssim < 0.0 || depth_weights.alpha_ssim > 1.0) {
    throw ConfigError("config: depth.alpha_ssim must lie in [0, 1]");
  }
  if (!(depth_weights.clamp_min > 0.0) || !(depth_weights.clamp_max > depth_weights.clamp_min)) {
    throw ConfigError("config: depth.depth_clamp must be a positive ordered pair");
  }
  if (!(depth_weights.huber_delta > 0.0)) {
    throw ConfigError("config: depth.huber_delta must be positive");
  }
  if (nms_iou < 0.0 || nms_iou > 1.0) {
    throw ConfigError("config: nms_iou must lie in [0, 1]");
  }
  if (conf_threshold < 0.0 || conf_threshold > 1.0) {
    throw ConfigError("config: conf_threshold must lie in [0, 1]");
  }
  if (classes.empty()) {
    throw ConfigError("config: classes must not be empty");
  }
  if (!(baseline_default > 0.0)) {
    throw ConfigError("config: baseline_default must be positive");
  }
}

int RunConfig::class_id(const std::string& name) const {
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] == name) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& err) {
    throw ConfigError(std::string("config: invalid JSON: ") + err.what());
  }
  RunConfig config;
  check_known_keys(root,
                   {"roi", "detection", "depth", "edge_variant", "density_mode", "nms_iou",
                    "conf_threshold", "seed", "classes", "baseline_default"},
                   "");

  if (root.contains("roi")) {
    const json& roi = root.at("roi");
    check_known_keys(roi, {"x", "y", "z", "dims"}, "roi.");
    read_range(roi, "x", config.roi.x_min, config.roi.x_max);
    read_range(roi, "y", config.roi.y_min, config.roi.y_max);
    read_range(roi, "z", config.roi.z_min, config.roi.z_max);
    if (roi.contains("dims")) {
      const auto& dims = roi.at("dims");
      if (!dims.is_array() || dims.size() != 3) {
        throw ConfigError("config: roi.dims must be [nx, ny, nz]");
      }
      config.roi.nx = dims[0].get<int>();
      config.roi.ny = dims[1].get<int>();
      config.roi.nz = dims[2].get<int>();
    }
  }

  if (root.contains("detection")) {
    const json& det = root.at("detection");
    check_known_keys(det, {"lambda_conf", "lambda_pose", "lambda_class", "lambda_giou", "epsilon"},
                     "detection.");
    read_if(det, "lambda_conf", config.det_weights.lambda_conf);
    read_if(det, "lambda_pose", config.det_weights.lambda_pose);
    read_if(det, "lambda_class", config.det_weights.lambda_class);
    read_if(det, "lambda_giou", config.det_weights.lambda_giou);
    read_if(det, "epsilon", config.det_weights.epsilon);
  }

  if (root.contains("depth")) {
    const json& depth = root.at("depth");
    check_known_keys(depth,
                     {"lambda_eps", "lambda_repr", "lambda_cons", "lambda_app", "lambda_sup",
                      "beta_edge", "alpha_ssim", "sup_decay_rate", "depth_clamp", "huber_delta",
                      "cross_consistency"},
                     "depth.");
    read_if(depth, "lambda_eps", config.depth_weights.lambda_eps);
    read_if(depth, "lambda_repr", config.depth_weights.lambda_repr);
    read_if(depth, "lambda_cons", config.depth_weights.lambda_cons);
    read_if(depth, "lambda_app", config.depth_weights.lambda_app);
    read_if(depth, "lambda_sup", config.depth_weights.lambda_sup);
    read_if(depth, "beta_edge", config.depth_weights.beta_edge);
    read_if(depth, "alpha_ssim", config.depth_weights.alpha_ssim);
    read_if(depth, "sup_decay_rate", config.depth_weights.sup_decay_rate);
    read_range(depth, "depth_clamp", config.depth_weights.clamp_min, config.depth_weights.clamp_max);
    read_if(depth, "huber_delta", config.depth_weights.huber_delta);
    read_if(depth, "cross_consistency", config.depth_weights.cross_consistency);
  }

  if (root.contains("edge_variant")) {
    config.depth_weights.edge_variant = parse_edge_variant(root.at("edge_variant").get<std::string>());
  }
  if (root.contains("density_mode")) {
    config.density_mode = parse_density_mode(root.at("density_mode").get<std::string>());
  }
  read_if(root, "nms_iou", config.nms_iou);
  read_if(root, "conf_threshold", config.conf_threshold);
  read_if(root, "seed", config.seed);
  read_if(root, "classes", config.classes);
  read_if(root, "baseline_default", config.baseline_default);

  config.validate();
  return config;
}

RunConfig load_config(const std::string& path) {
  return parse_config(read_text_file(path));
}

std::string config_to_json(const RunConfig& config) {
  json root;
  root["roi"]["x"] = {config.roi.x_min, config.roi.x_max};
  root["roi"]["y"] = {config.roi.y_min, config.roi.y_max};
  root["roi"]["z"] = {config.roi.z_min, config.roi.z_max};
  root["roi"]["dims"] = {config.roi.nx, config.roi.ny, config.roi.nz};
  root["detection"]["lambda_conf"] = config.det_weights.lambda_conf;
  root["detection"]["lambda_pose"] = config.det_weights.lambda_pose;
  root["detection"]["lambda_class"] = config.det_weights.lambda_class;
  root["detection"]["lambda_giou"] = config.det_weights.lambda_giou;
  root["detection"]["epsilon"] = config.det_weights.epsilon;
  root["depth"]["lambda_eps"] = config.depth_weights.lambda_eps;
  root["depth"]["lambda_repr"] = config.depth_weights.lambda_repr;
  root["depth"]["lambda_cons"] = config.depth_weights.lambda_cons;
  root["depth"]["lambda_app"] = config.depth_weights.lambda_app;
  root["depth"]["lambda_sup"] = config.depth_weights.lambda_sup;
  root["depth"]["beta_edge"] = config.depth_weights.beta_edge;
  root["depth"]["alpha_ssim"] = config.depth_weights.alpha_ssim;
  root["depth"]["sup_decay_rate"] = config.depth_weights.sup_decay_rate;
  root["depth"]["depth_clamp"] = {config.depth_weights.clamp_min, config.depth_weights.clamp_max};
  root["depth"]["huber_delta"] = config.depth_weights.huber_delta;
  root["depth"]["cross_consistency"] = config.depth_weights.cross_consistency;
  root["edge_variant"] = config.depth_weights.edge_variant == EdgeVariant::DxDy ? "dx_dy" : "dx_dx";
  root["density_mode"] = density_mode_name(config.density_mode);
  root["nms_iou"] = config.nms_iou;
  root["conf_threshold"] = config.conf_threshold;
  root["seed"] = config.seed;
  root["classes"] = config.classes;
  root["baseline_default"] = config.baseline_default;
  return root.dump();
}

std::string config_hash(const RunConfig& config) {
  const std::string text = config_to_json(config);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const char ch : text) {
    hash ^= static_cast<std::uint8_t>(ch);
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace vr3dense
