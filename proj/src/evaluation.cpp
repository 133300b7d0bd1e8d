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

#include "vr3dense/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace vr3dense {

DepthMetrics depth_metrics(const DepthMap& pred, const std::vector<DepthSample>& gt,
                           double min_depth, double max_depth) {
  if (pred.channels() != 1) {
    throw ParameterError("depth_metrics: prediction must be a single-channel depth map");
  }
  if (!(max_depth > min_depth)) {
    throw ParameterError("depth_metrics: invalid depth range");
  }
  constexpr double kPredFloor = 0.1;
  DepthMetrics m;
  double sum_abs_rel = 0.0, sum_sq_rel = 0.0, sum_sq = 0.0, sum_sq_log = 0.0;
  int d1 = 0, d2 = 0, d3 = 0;
  for (const DepthSample& s : gt) {
    if (s.depth < min_depth || s.depth > max_depth || s.depth <= 0.0) {
      continue;
    }
    if (s.v < 0 || s.v >= pred.height() || s.u < 0 || s.u >= pred.width()) {
      throw ParameterError("depth_metrics: sample pixel outside the prediction");
    }
    const double g = s.depth;
    const double p = std::min(std::max(pred(s.v, s.u), kPredFloor), max_depth);
    const double diff = p - g;
    sum_abs_rel += std::abs(diff) / g;
    sum_sq_rel += diff * diff / g;
    sum_sq += diff * diff;
    const double dlog = std::log(p) - std::log(g);
    sum_sq_log += dlog * dlog;
    const double ratio = std::max(p / g, g / p);
    d1 += ratio < 1.25 ? 1 : 0;
    d2 += ratio < 1.25 * 1.25 ? 1 : 0;
    d3 += ratio < 1.25 * 1.25 * 1.25 ? 1 : 0;
    ++m.sample_count;
  }
  if (m.sample_count == 0) {
    throw EvaluationError("depth_metrics: no ground-truth sample within range");
  }
  const double n = static_cast<double>(m.sample_count);
  m.abs_rel = sum_abs_rel / n;
  m.sq_rel = sum_sq_rel / n;
  m.rmse = std::sqrt(sum_sq / n);
  m.rmse_log = std::sqrt(sum_sq_log / n);
  m.delta1 = d1 / n;
  m.delta2 = d2 / n;
  m.delta3 = d3 / n;
  return m;
}

std::vector<DepthSample> collect_depth_samples(const ImageGrid& sparse) {
  if (sparse.channels() != 1) {
    throw ParameterError("collect_depth_samples: expected a single-channel image");
  }
  std::vector<DepthSample> samples;
  for (Index r = 0; r < sparse.height(); ++r) {
    for (Index c = 0; c < sparse.width(); ++c) {
      if (sparse(r, c) > 0.0) {
        samples.push_back({static_cast<int>(c), static_cast<int>(r), sparse(r, c)});
      }
    }
  }
  return samples;
}

PrCurve average_precision_40(const std::vector<Detection>& detections,
                             const std::vector<OrientedBox3D>& ground_truth, double iou_threshold) {
  if (ground_truth.empty()) {
    throw EvaluationError("average_precision_40: no ground-truth boxes");
  }
  if (!(iou_threshold > 0.0) || iou_threshold > 1.0) {
    throw ParameterError("average_precision_40: IoU threshold must lie in (0, 1]");
  }

  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detections[a].confidence > detections[b].confidence;
  });

  std::vector<bool> gt_matched(ground_truth.size(), false);
  std::vector<double> recalls;
  std::vector<double> precisions;
  recalls.reserve(detections.size());
  precisions.reserve(detections.size());
  int true_positives = 0;
  int processed = 0;
  for (const std::size_t i : order) {
    ++processed;
    double best_iou = 0.0;
    std::size_t best_gt = ground_truth.size();
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      if (gt_matched[g]) {
        continue;
      }
      const double overlap = iou_3d(detections[i].box, ground_truth[g]);
      if (overlap >= iou_threshold && overlap > best_iou) {
        best_iou = overlap;
        best_gt = g;
      }
    }
    if (best_gt < ground_truth.size()) {
      gt_matched[best_gt] = true;
      ++true_positives;
    }
    recalls.push_back(static_cast<double>(true_positives) / static_cast<double>(ground_truth.size()));
    precisions.push_back(static_cast<double>(true_positives) / static_cast<double>(processed));
  }

  // Right-side maximum envelope: best precision at or beyond each raw point.
  std::vector<double> envelope(precisions.size());
  double running = 0.0;
  for (std::size_t i = precisions.size(); i-- > 0;) {
    running = std::max(running, precisions[i]);
    envelope[i] = running;
  }

  PrCurve curve;
  double sum = 0.0;
  for (int k = 1; k <= 40; ++k) {
    const double recall = static_cast<double>(k) / 40.0;
    // First raw point reaching this recall; envelope gives the interpolation.
    const auto it = std::lower_bound(recalls.begin(), recalls.end(), recall);
    double precision = 0.0;
    if (it != recalls.end()) {
      precision = envelope[static_cast<std::size_t>(it - recalls.begin())];
    }
    curve.recall_thresholds[static_cast<std::size_t>(k - 1)] = recall;
    curve.precisions[static_cast<std::size_t>(k - 1)] = precision;
    sum += precision;
  }
  curve.ap = sum / 40.0;
  return curve;
}

double map_multiclass(const std::vector<Detection>& detections,
                      const std::vector<std::pair<OrientedBox3D, int>>& ground_truth,
                      double iou_threshold) {
  std::set<int> classes;
  for (const auto& [box, class_id] : ground_truth) {
    classes.insert(class_id);
  }
  if (classes.empty()) {
    throw EvaluationError("map_multiclass: no class has ground truth");
  }
  double sum = 0.0;
  for (const int class_id : classes) {
    std::vector<Detection> class_dets;
    for (const Detection& det : detections) {
      if (det.class_id == class_id) {
        class_dets.push_back(det);
      }
    }
    std::vector<OrientedBox3D> class_gts;
    for (const auto& [box, gt_class] : ground_truth) {
      if (gt_class == class_id) {
        class_gts.push_back(box);
      }
    }
    sum += average_precision_40(class_dets, class_gts, iou_threshold).ap;
  }
  return sum / static_cast<double>(classes.size());
}

}  // namespace vr3dense
