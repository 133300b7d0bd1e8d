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

#include "vr3dense/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

#include "vr3dense/config.hpp"
#include "vr3dense/evaluation.hpp"
#include "vr3dense/gradcheck.hpp"
#include "vr3dense/synthetic.hpp"

namespace vr3dense {

namespace {

using nlohmann::json;

struct CliContext {
  RunConfig config;
  int threads = 1;
  std::ostream* out = nullptr;
};

std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Labels usable for detection work: drop DontCare-style sentinels and any
/// class the configuration does not evaluate.
std::vector<std::pair<OrientedBox3D, int>> labels_to_boxes(const std::vector<ObjectLabel>& labels,
                                                           const Calibration& calib,
                                                           const RunConfig& config) {
  std::vector<std::pair<OrientedBox3D, int>> boxes;
  for (const ObjectLabel& label : labels) {
    const int class_id = config.class_id(label.class_name);
    if (class_id < 0 || label.height <= 0.0 || label.width <= 0.0 || label.length <= 0.0) {
      continue;
    }
    boxes.emplace_back(label_to_lidar_box(label, calib), class_id);
  }
  return boxes;
}

std::optional<double> label_line_score(const std::string& line) {
  std::istringstream stream(line);
  std::vector<std::string> tokens;
  std::string token;
  while (stream >> token) {
    tokens.push_back(token);
  }
  if (tokens.size() < 16) {
    return std::nullopt;
  }
  return std::stod(tokens[15]);
}

json detection_report_json(const DetLossReport& report) {
  json node;
  node["conf"] = report.conf;
  node["pose"] = report.pose;
  node["class"] = report.classification;
  node["giou"] = report.giou;
  node["total"] = report.total;
  node["gradient_norm"] = report.gradient.norm();
  return node;
}

json depth_report_json(const DepthLossReport& report) {
  json node;
  node["eps"] = report.eps;
  node["repr"] = report.repr;
  node["cons"] = report.cons;
  node["app"] = report.app;
  node["total"] = report.total;
  return node;
}

json depth_metrics_json(const DepthMetrics& m) {
  json node;
  node["abs_rel"] = m.abs_rel;
  node["sq_rel"] = m.sq_rel;
  node["rmse"] = m.rmse;
  node["rmse_log"] = m.rmse_log;
  node["delta1"] = m.delta1;
  node["delta2"] = m.delta2;
  node["delta3"] = m.delta3;
  node["samples"] = m.sample_count;
  return node;
}

void print_metrics_block(std::ostream& out, const DepthMetrics& m) {
  out << "abs_rel=" << m.abs_rel << "\n"
      << "sq_rel=" << m.sq_rel << "\n"
      << "rmse=" << m.rmse << "\n"
      << "rmse_log=" << m.rmse_log << "\n"
      << "delta1=" << m.delta1 << "\n"
      << "delta2=" << m.delta2 << "\n"
      << "delta3=" << m.delta3 << "\n"
      << "samples=" << m.sample_count << "\n";
}

Calibration load_calibration(const std::string& path, const RunConfig& config) {
  return parse_calib(read_text_file(path), config.baseline_default);
}

int cmd_voxelize(const CliContext& ctx, const std::string& scan_path, const std::string& out_path) {
  const PointCloud cloud = read_point_cloud(read_binary_file(scan_path));
  const VoxelGrid raw = voxelize(cloud, ctx.config.roi, ctx.threads);
  const VoxelGrid grid = normalize_density(raw, ctx.config.density_mode);
  write_binary_file(out_path, write_voxel_grid(grid));
  *ctx.out << "points=" << cloud.size() << "\n";
  *ctx.out << "density_sum=" << raw.density.sum() << "\n";
  return 0;
}

int cmd_project(const CliContext& ctx, const std::string& scan_path, const std::string& calib_path,
                int height, int width, const std::string& out_path) {
  const PointCloud cloud = read_point_cloud(read_binary_file(scan_path));
  const Calibration calib = load_calibration(calib_path, ctx.config);
  const std::vector<ProjectedPoint> points = project_points(cloud, calib, height, width);
  write_binary_file(out_path, encode_depth_pgm(sparse_depth_image(points, height, width)));
  *ctx.out << "projected=" << points.size() << "\n";
  return 0;
}

int cmd_encode_targets(const CliContext& ctx, const std::string& labels_path,
                       const std::string& calib_path, const std::string& out_path) {
  const std::vector<ObjectLabel> labels = parse_labels(read_text_file(labels_path));
  const Calibration calib = load_calibration(calib_path, ctx.config);
  const auto boxes = labels_to_boxes(labels, calib, ctx.config);
  const TargetTensor tensor =
      encode_targets(boxes, ctx.config.roi, static_cast<int>(ctx.config.classes.size()));
  write_binary_file(out_path, write_target_tensor(tensor));
  int occupied = 0;
  for (int ix = 0; ix < TargetTensor::kGridCells; ++ix) {
    for (int iy = 0; iy < TargetTensor::kGridCells; ++iy) {
      occupied += tensor.at(ix, iy, TargetTensor::kConf) > 0.5 ? 1 : 0;
    }
  }
  *ctx.out << "labels=" << labels.size() << "\n";
  *ctx.out << "encoded=" << occupied << "\n";
  return 0;
}

struct LossesArgs {
  std::string pred_path, gt_path;
  std::string left_path, right_path, depth_left_path, depth_right_path;
  std::string calib_path, sparse_path;
  double focal = 0.0;
  double baseline = 0.0;
  int epoch = 0;
  std::string out_path;
};

int cmd_losses(const CliContext& ctx, const LossesArgs& args) {
  json report;
  const bool want_detection = !args.pred_path.empty() || !args.gt_path.empty();
  const bool want_depth = !args.left_path.empty() || !args.right_path.empty();
  if (!want_detection && !want_depth) {
    throw ParameterError("losses: provide --pred/--gt tensors or a stereo pair with depths");
  }
  if (want_detection) {
    if (args.pred_path.empty() || args.gt_path.empty()) {
      throw ParameterError("losses: both --pred and --gt are required");
    }
    const TargetTensor pred = read_target_tensor(read_binary_file(args.pred_path));
    const TargetTensor gt = read_target_tensor(read_binary_file(args.gt_path));
    const DetLossReport det = loss_detection_total(pred, gt, ctx.config.det_weights);
    report["detection"] = detection_report_json(det);
    *ctx.out << "detection_total=" << det.total << "\n";
  }
  if (want_depth) {
    if (args.left_path.empty() || args.right_path.empty() || args.depth_left_path.empty() ||
        args.depth_right_path.empty()) {
      throw ParameterError("losses: stereo mode needs --left, --right, --depth-left, --depth-right");
    }
    StereoPair pair;
    pair.left = decode_image(read_binary_file(args.left_path));
    pair.right = decode_image(read_binary_file(args.right_path));
    if (!args.calib_path.empty()) {
      const Calibration calib = load_calibration(args.calib_path, ctx.config);
      pair.focal = calib.focal;
      pair.baseline = calib.baseline;
    }
    if (args.focal > 0.0) {
      pair.focal = args.focal;
    }
    if (args.baseline > 0.0) {
      pair.baseline = args.baseline;
    }
    const DepthMap depth_l = decode_depth_pgm(read_binary_file(args.depth_left_path));
    const DepthMap depth_r = decode_depth_pgm(read_binary_file(args.depth_right_path));
    const DepthLossReport depth = loss_depth_unsup(pair, depth_l, depth_r, pair.left, EdgeParams{},
                                                   ctx.config.depth_weights);
    report["depth_unsup"] = depth_report_json(depth);
    *ctx.out << "depth_unsup_total=" << depth.total << "\n";
    if (!args.sparse_path.empty()) {
      const ImageGrid sparse = decode_depth_pgm(read_binary_file(args.sparse_path));
      std::vector<ProjectedPoint> projected;
      for (const DepthSample& s : collect_depth_samples(sparse)) {
        ProjectedPoint p;
        p.pixel_u = s.u;
        p.pixel_v = s.v;
        p.u = s.u;
        p.v = s.v;
        p.depth = s.depth;
        projected.push_back(p);
      }
      const double sup =
          loss_depth_sup(depth_l, projected, ctx.config.depth_weights.lambda_sup, args.epoch,
                         ctx.config.depth_weights.sup_decay_rate);
      report["depth_sup"] = {{"total", sup}, {"epoch", args.epoch}, {"points", projected.size()}};
      *ctx.out << "depth_sup_total=" << sup << "\n";
    }
  }
  if (!args.out_path.empty()) {
    write_text_file(args.out_path, report.dump(2) + "\n");
  }
  return 0;
}

int cmd_gradcheck(const CliContext& ctx, int trials, const std::string& out_path) {
  const GradCheckReport report = run_gradient_certification(ctx.config.seed, trials);
  *ctx.out << format_gradcheck_table(report);
  if (!out_path.empty()) {
    json node;
    node["tolerance"] = report.tolerance;
    node["all_passed"] = report.all_passed;
    for (const GradCheckRow& row : report.rows) {
      node["rows"].push_back({{"name", row.name},
                              {"trials", row.trials},
                              {"max_rel_error", row.max_rel_error},
                              {"passed", row.passed}});
    }
    write_text_file(out_path, node.dump(2) + "\n");
  }
  return report.all_passed ? 0 : 1;
}

int cmd_eval_detection(const CliContext& ctx, const std::string& det_path, const std::string& gt_path,
                       const std::string& calib_path, double iou_threshold,
                       const std::string& out_path) {
  const Calibration calib = load_calibration(calib_path, ctx.config);
  const auto gt_boxes = labels_to_boxes(parse_labels(read_text_file(gt_path)), calib, ctx.config);

  std::vector<Detection> detections;
  std::istringstream det_stream(read_text_file(det_path));
  std::string line;
  while (std::getline(det_stream, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    const ObjectLabel label = parse_label_line(line);
    const int class_id = ctx.config.class_id(label.class_name);
    if (class_id < 0 || label.height <= 0.0 || label.width <= 0.0 || label.length <= 0.0) {
      continue;
    }
    Detection det;
    det.box = label_to_lidar_box(label, calib);
    det.class_id = class_id;
    det.confidence = label_line_score(line).value_or(1.0);
    detections.push_back(det);
  }

  json node;
  node["iou_threshold"] = iou_threshold;
  double map_value = 0.0;
  int evaluated_classes = 0;
  for (std::size_t c = 0; c < ctx.config.classes.size(); ++c) {
    std::vector<OrientedBox3D> class_gts;
    for (const auto& [box, class_id] : gt_boxes) {
      if (class_id == static_cast<int>(c)) {
        class_gts.push_back(box);
      }
    }
    if (class_gts.empty()) {
      continue;
    }
    std::vector<Detection> class_dets;
    for (const Detection& det : detections) {
      if (det.class_id == static_cast<int>(c)) {
        class_dets.push_back(det);
      }
    }
    const PrCurve curve = average_precision_40(class_dets, class_gts, iou_threshold);
    node["per_class"][ctx.config.classes[c]]["ap"] = curve.ap;
    node["per_class"][ctx.config.classes[c]]["ground_truth"] = class_gts.size();
    node["per_class"][ctx.config.classes[c]]["detections"] = class_dets.size();
    map_value += curve.ap;
    ++evaluated_classes;
    *ctx.out << "ap_" << ctx.config.classes[c] << "=" << curve.ap << "\n";
  }
  if (evaluated_classes == 0) {
    throw EvaluationError("eval-detection: no evaluated class has ground truth");
  }
  map_value /= evaluated_classes;
  node["map"] = map_value;
  *ctx.out << "map=" << map_value << "\n";
  if (!out_path.empty()) {
    write_text_file(out_path, node.dump(2) + "\n");
  }
  return 0;
}

int cmd_eval_depth(const CliContext& ctx, const std::string& pred_path, const std::string& gt_path,
                   double min_depth, double max_depth, const std::string& out_path) {
  const DepthMap pred = decode_depth_pgm(read_binary_file(pred_path));
  const ImageGrid sparse = decode_depth_pgm(read_binary_file(gt_path));
  const DepthMetrics metrics =
      depth_metrics(pred, collect_depth_samples(sparse), min_depth, max_depth);
  print_metrics_block(*ctx.out, metrics);
  if (!out_path.empty()) {
    write_text_file(out_path, depth_metrics_json(metrics).dump(2) + "\n");
  }
  return 0;
}

struct FitArgs {
  std::string left_path, right_path, init_path;
  double focal = 0.0;
  double baseline = 0.0;
  double init_depth = 20.0;
  int steps = 100;
  double learning_rate = 1e4;
  std::string out_path, trace_path;
};

int cmd_fit_depth(const CliContext& ctx, const FitArgs& args) {
  StereoPair pair;
  pair.left = decode_image(read_binary_file(args.left_path));
  pair.right = decode_image(read_binary_file(args.right_path));
  pair.focal = args.focal;
  pair.baseline = args.baseline;
  DepthMap init;
  if (!args.init_path.empty()) {
    init = decode_depth_pgm(read_binary_file(args.init_path));
  } else {
    init = ImageGrid::constant(pair.left.height(), pair.left.width(), 1, args.init_depth);
  }
  const FitResult result =
      fit_depth_toy(pair, init, ctx.config.depth_weights, EdgeParams{}, args.steps, args.learning_rate);
  if (!args.out_path.empty()) {
    write_binary_file(args.out_path, encode_depth_pgm(result.depth_l));
  }
  if (!args.trace_path.empty()) {
    std::ostringstream csv;
    csv << "step,loss\n";
    for (std::size_t i = 0; i < result.trace.size(); ++i) {
      csv << i << "," << csv_double(result.trace[i]) << "\n";
    }
    write_text_file(args.trace_path, csv.str());
  }
  *ctx.out << "steps=" << args.steps << "\n";
  *ctx.out << "final_loss=" << csv_double(result.trace.back()) << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Voxel, oriented-box, and stereo-depth kernels with certified gradients"};
  app.require_subcommand(1);

  std::string config_path;
  if (const char* env = std::getenv("VR3DENSE_CONFIG")) {
    config_path = env;
  }
  app.add_option("--config", config_path, "JSON run configuration");

  CliContext ctx;
  ctx.out = &out;
  std::optional<std::uint64_t> seed_override;
  std::optional<double> conf_override, nms_override;
  std::optional<std::string> density_override, edge_override;
  app.add_option("--seed", seed_override, "Override the config seed");
  app.add_option("--conf-threshold", conf_override, "Override the decode confidence threshold");
  app.add_option("--nms-iou", nms_override, "Override the NMS BEV IoU threshold");
  app.add_option("--density-mode", density_override, "Override density mode: raw|log1p|binary");
  app.add_option("--edge-variant", edge_override, "Override edge variant: dx_dy|dx_dx");
  app.add_option("--threads", ctx.threads, "Worker threads for voxelization")
      ->check(CLI::PositiveNumber);

  // voxelize
  auto* voxelize_cmd = app.add_subcommand("voxelize", "Point cloud to density grid file");
  std::string scan_path, out_path;
  voxelize_cmd->add_option("--scan", scan_path, "Velodyne .bin scan")->required();
  voxelize_cmd->add_option("--output", out_path, "Grid file to write")->required();

  // project
  auto* project_cmd = app.add_subcommand("project", "Scan + calib to sparse depth PGM");
  std::string project_scan, project_calib, project_out;
  int project_height = 0, project_width = 0;
  project_cmd->add_option("--scan", project_scan)->required();
  project_cmd->add_option("--calib", project_calib)->required();
  project_cmd->add_option("--height", project_height)->required()->check(CLI::PositiveNumber);
  project_cmd->add_option("--width", project_width)->required()->check(CLI::PositiveNumber);
  project_cmd->add_option("--output", project_out)->required();

  // encode-targets
  auto* encode_cmd = app.add_subcommand("encode-targets", "Labels + calib to a target tensor file");
  std::string encode_labels, encode_calib, encode_out;
  encode_cmd->add_option("--labels", encode_labels)->required();
  encode_cmd->add_option("--calib", encode_calib)->required();
  encode_cmd->add_option("--output", encode_out)->required();

  // losses
  auto* losses_cmd = app.add_subcommand("losses", "Loss report for tensors and/or a stereo pair");
  LossesArgs losses_args;
  losses_cmd->add_option("--pred", losses_args.pred_path, "Prediction tensor file");
  losses_cmd->add_option("--gt", losses_args.gt_path, "Ground-truth tensor file");
  losses_cmd->add_option("--left", losses_args.left_path, "Left image (PPM)");
  losses_cmd->add_option("--right", losses_args.right_path, "Right image (PPM)");
  losses_cmd->add_option("--depth-left", losses_args.depth_left_path, "Left depth (16-bit PGM)");
  losses_cmd->add_option("--depth-right", losses_args.depth_right_path, "Right depth (16-bit PGM)");
  losses_cmd->add_option("--calib", losses_args.calib_path, "Calibration for focal/baseline");
  losses_cmd->add_option("--focal", losses_args.focal, "Focal length in pixels");
  losses_cmd->add_option("--baseline", losses_args.baseline, "Stereo baseline in meters");
  losses_cmd->add_option("--sparse-depth", losses_args.sparse_path, "Projected-depth PGM");
  losses_cmd->add_option("--epoch", losses_args.epoch, "Epoch for the supervised decay");
  losses_cmd->add_option("--output", losses_args.out_path, "JSON report path");

  // gradcheck
  auto* gradcheck_cmd = app.add_subcommand("gradcheck", "Run the gradient certification suite");
  int gradcheck_trials = 50;
  std::string gradcheck_out;
  gradcheck_cmd->add_option("--trials", gradcheck_trials)->check(CLI::PositiveNumber);
  gradcheck_cmd->add_option("--output", gradcheck_out, "JSON report path");

  // eval-detection
  auto* evaldet_cmd = app.add_subcommand("eval-detection", "mAP@40 from detection/gt label files");
  std::string evaldet_dets, evaldet_gt, evaldet_calib, evaldet_out;
  double evaldet_iou = 0.5;
  evaldet_cmd->add_option("--detections", evaldet_dets)->required();
  evaldet_cmd->add_option("--gt", evaldet_gt)->required();
  evaldet_cmd->add_option("--calib", evaldet_calib)->required();
  evaldet_cmd->add_option("--iou", evaldet_iou, "3D IoU threshold");
  evaldet_cmd->add_option("--output", evaldet_out, "JSON report path");

  // eval-depth
  auto* evaldepth_cmd = app.add_subcommand("eval-depth", "Depth metrics from prediction + sparse gt");
  std::string evaldepth_pred, evaldepth_gt, evaldepth_out;
  double evaldepth_min = 0.0, evaldepth_max = 70.0;
  evaldepth_cmd->add_option("--pred", evaldepth_pred)->required();
  evaldepth_cmd->add_option("--gt", evaldepth_gt)->required();
  evaldepth_cmd->add_option("--min-depth", evaldepth_min);
  evaldepth_cmd->add_option("--max-depth", evaldepth_max);
  evaldepth_cmd->add_option("--output", evaldepth_out, "JSON report path");

  // fit-depth
  auto* fit_cmd = app.add_subcommand("fit-depth", "Optimize per-pixel depth on a stereo pair");
  FitArgs fit_args;
  fit_cmd->add_option("--left", fit_args.left_path)->required();
  fit_cmd->add_option("--right", fit_args.right_path)->required();
  fit_cmd->add_option("--init", fit_args.init_path, "Initial depth (16-bit PGM)");
  fit_cmd->add_option("--init-depth", fit_args.init_depth, "Constant init when --init is absent");
  fit_cmd->add_option("--focal", fit_args.focal)->required();
  fit_cmd->add_option("--baseline", fit_args.baseline)->required();
  fit_cmd->add_option("--steps", fit_args.steps)->check(CLI::PositiveNumber);
  fit_cmd->add_option("--lr", fit_args.learning_rate, "Gradient-descent learning rate");
  fit_cmd->add_option("--output", fit_args.out_path, "Fitted depth PGM");
  fit_cmd->add_option("--trace", fit_args.trace_path, "Per-step loss CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    ctx.config = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (seed_override) {
      ctx.config.seed = *seed_override;
    }
    if (conf_override) {
      ctx.config.conf_threshold = *conf_override;
    }
    if (nms_override) {
      ctx.config.nms_iou = *nms_override;
    }
    if (density_override) {
      ctx.config.density_mode = parse_config("{\"density_mode\":\"" + *density_override + "\"}")
                                    .density_mode;
    }
    if (edge_override) {
      ctx.config.depth_weights.edge_variant =
          parse_config("{\"edge_variant\":\"" + *edge_override + "\"}").depth_weights.edge_variant;
    }
    ctx.config.validate();

    out << "config_hash=" << config_hash(ctx.config) << "\n";
    out << "config=" << config_to_json(ctx.config) << "\n";
    out << "seed=" << ctx.config.seed << "\n";

    if (voxelize_cmd->parsed()) {
      return cmd_voxelize(ctx, scan_path, out_path);
    }
    if (project_cmd->parsed()) {
      return cmd_project(ctx, project_scan, project_calib, project_height, project_width, project_out);
    }
    if (encode_cmd->parsed()) {
      return cmd_encode_targets(ctx, encode_labels, encode_calib, encode_out);
    }
    if (losses_cmd->parsed()) {
      return cmd_losses(ctx, losses_args);
    }
    if (gradcheck_cmd->parsed()) {
      return cmd_gradcheck(ctx, gradcheck_trials, gradcheck_out);
    }
    if (evaldet_cmd->parsed()) {
      return cmd_eval_detection(ctx, evaldet_dets, evaldet_gt, evaldet_calib, evaldet_iou, evaldet_out);
    }
    if (evaldepth_cmd->parsed()) {
      return cmd_eval_depth(ctx, evaldepth_pred, evaldepth_gt, evaldepth_min, evaldepth_max,
                            evaldepth_out);
    }
    if (fit_cmd->parsed()) {
      return cmd_fit_depth(ctx, fit_args);
    }
    err << "error: no subcommand selected\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_cli(int argc, const char* const* argv) { return run_cli(argc, argv, std::cout, std::cerr); }

}  // namespace vr3dense
