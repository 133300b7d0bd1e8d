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

#include "vr3dense/box_geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>

namespace vr3dense {

namespace {

constexpr double kAreaEpsilon = 1e-12;

using Point2 = Eigen::Vector2d;

double cross2(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

/// BEV footprint, counter-clockwise.
std::array<Point2, 4> bev_corners(const OrientedBox3D& box) {
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const double hl = 0.5 * box.length;
  const double hw = 0.5 * box.width;
  const std::array<Point2, 4> local = {Point2(hl, hw), Point2(-hl, hw), Point2(-hl, -hw),
                                       Point2(hl, -hw)};
  std::array<Point2, 4> out;
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = Point2(box.center.x() + c * local[i].x() - s * local[i].y(),
                    box.center.y() + s * local[i].x() + c * local[i].y());
  }
  return out;
}

/// Sutherland-Hodgman clip of a convex subject polygon against one edge of a
/// counter-clockwise clipper; "inside" is the left half-plane of (p1 -> p2).
std::vector<Point2> clip_edge(const std::vector<Point2>& subject, const Point2& p1, const Point2& p2) {
  std::vector<Point2> out;
  const std::size_t n = subject.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& current = subject[i];
    const Point2& next = subject[(i + 1) % n];
    const double side_current = cross2(p1, p2, current);
    const double side_next = cross2(p1, p2, next);
    if (side_current >= -kAreaEpsilon) {
      out.push_back(current);
    }
    if ((side_current > kAreaEpsilon && side_next < -kAreaEpsilon) ||
        (side_current < -kAreaEpsilon && side_next > kAreaEpsilon)) {
      const double t = side_current / (side_current - side_next);
      out.push_back(current + t * (next - current));
    }
  }
  return out;
}

double polygon_area(const std::vector<Point2>& polygon) {
  if (polygon.size() < 3) {
    return 0.0;
  }
  double twice_area = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Point2& a = polygon[i];
    const Point2& b = polygon[(i + 1) % polygon.size()];
    twice_area += a.x() * b.y() - b.x() * a.y();
  }
  const double area = 0.5 * std::abs(twice_area);
  return area < kAreaEpsilon ? 0.0 : area;
}

/// Andrew's monotone chain; returns the hull counter-clockwise.
std::vector<Point2> convex_hull(std::vector<Point2> points) {
  std::sort(points.begin(), points.end(), [](const Point2& a, const Point2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  points.erase(std::unique(points.begin(), points.end(),
                           [](const Point2& a, const Point2& b) { return a == b; }),
               points.end());
  if (points.size() < 3) {
    return points;
  }
  std::vector<Point2> hull(2 * points.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], points[i]) <= 0.0) {
      --k;
    }
    hull[k++] = points[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = points.size() - 1; i-- > 0;) {
    while (k >= lower && cross2(hull[k - 2], hull[k - 1], points[i]) <= 0.0) {
      --k;
    }
    hull[k++] = points[i];
  }
  hull.resize(k - 1);
  return hull;
}

double bev_intersection_area(const OrientedBox3D& a, const OrientedBox3D& b) {
  const std::array<Point2, 4> fa = bev_corners(a);
  const std::array<Point2, 4> fb = bev_corners(b);
  std::vector<Point2> subject(fa.begin(), fa.end());
  for (std::size_t i = 0; i < 4 && !subject.empty(); ++i) {
    subject = clip_edge(subject, fb[i], fb[(i + 1) % 4]);
  }
  return polygon_area(subject);
}

double z_overlap(const OrientedBox3D& a, const OrientedBox3D& b) {
  const double low = std::max(a.center.z() - 0.5 * a.height, b.center.z() - 0.5 * b.height);
  const double high = std::min(a.center.z() + 0.5 * a.height, b.center.z() + 0.5 * b.height);
  return std::max(0.0, high - low);
}

double intersection_volume(const OrientedBox3D& a, const OrientedBox3D& b) {
  const double dz = z_overlap(a, b);
  if (dz <= 0.0) {
    return 0.0;
  }
  return bev_intersection_area(a, b) * dz;
}

void check_box(const OrientedBox3D& box, const char* who) {
  if (!(box.length > 0.0) || !(box.width > 0.0) || !(box.height > 0.0)) {
    throw ParameterError(std::string(who) + ": box size components must be positive");
  }
}

Eigen::Matrix4d velo_to_rect_matrix(const Calibration& calib) {
  Eigen::Matrix4d tr = Eigen::Matrix4d::Identity();
  tr.topRows<3>() = calib.Tr_velo_to_cam;
  Eigen::Matrix4d rect = Eigen::Matrix4d::Identity();
  rect.topLeftCorner<3, 3>() = calib.R0_rect;
  return rect * tr;
}

}  // namespace

double wrap_angle(double radians) {
  double wrapped = std::fmod(radians + M_PI, 2.0 * M_PI);
  if (wrapped < 0.0) {
    wrapped += 2.0 * M_PI;
  }
  return wrapped - M_PI;
}

std::array<Eigen::Vector3d, 8> box_corners(const OrientedBox3D& box) {
  check_box(box, "box_corners");
  const std::array<Point2, 4> footprint = bev_corners(box);
  std::array<Eigen::Vector3d, 8> corners;
  for (std::size_t i = 0; i < 4; ++i) {
    corners[i] = Eigen::Vector3d(footprint[i].x(), footprint[i].y(), box.center.z() - 0.5 * box.height);
    corners[i + 4] =
        Eigen::Vector3d(footprint[i].x(), footprint[i].y(), box.center.z() + 0.5 * box.height);
  }
  return corners;
}

double iou_bev(const OrientedBox3D& a, const OrientedBox3D& b) {
  check_box(a, "iou_bev");
  check_box(b, "iou_bev");
  const double inter = bev_intersection_area(a, b);
  const double uni = a.bev_area() + b.bev_area() - inter;
  if (uni <= 0.0) {
    return 0.0;
  }
  return std::min(1.0, std::max(0.0, inter / uni));
}

double iou_3d(const OrientedBox3D& a, const OrientedBox3D& b) {
  check_box(a, "iou_3d");
  check_box(b, "iou_3d");
  const double inter = intersection_volume(a, b);
  const double uni = a.volume() + b.volume() - inter;
  if (uni <= 0.0) {
    return 0.0;
  }
  return std::min(1.0, std::max(0.0, inter / uni));
}

double giou_3d(const OrientedBox3D& a, const OrientedBox3D& b) {
  check_box(a, "giou_3d");
  check_box(b, "giou_3d");
  const double inter = intersection_volume(a, b);
  const double uni = a.volume() + b.volume() - inter;
  const double iou = uni > 0.0 ? inter / uni : 0.0;

  // Enclosing shape: prism of the BEV convex hull of both footprints over the
  // combined z-extent. Identical boxes give |C| = |U|, so giou(a, a) = 1.
  const std::array<Point2, 4> fa = bev_corners(a);
  const std::array<Point2, 4> fb = bev_corners(b);
  std::vector<Point2> points(fa.begin(), fa.end());
  points.insert(points.end(), fb.begin(), fb.end());
  const double hull_area = polygon_area(convex_hull(std::move(points)));

  const double z_low = std::min(a.center.z() - 0.5 * a.height, b.center.z() - 0.5 * b.height);
  const double z_high = std::max(a.center.z() + 0.5 * a.height, b.center.z() + 0.5 * b.height);
  const double enclosing = hull_area * (z_high - z_low);
  if (enclosing <= 0.0) {
    return iou;
  }
  return iou - (enclosing - uni) / enclosing;
}

Eigen::Vector3d lidar_to_camera(const Eigen::Vector3d& point, const Calibration& calib) {
  return calib.R0_rect * (calib.Tr_velo_to_cam * point.homogeneous());
}

Eigen::Vector3d camera_to_lidar(const Eigen::Vector3d& point, const Calibration& calib) {
  const Eigen::Matrix4d chain = velo_to_rect_matrix(calib);
  Eigen::FullPivLU<Eigen::Matrix4d> lu(chain);
  if (!lu.isInvertible()) {
    throw CalibrationError("camera_to_lidar: velo-to-camera chain is singular");
  }
  const Eigen::Vector4d velo = lu.solve(point.homogeneous());
  return velo.head<3>() / velo.w();
}

std::vector<ProjectedPoint> project_points(const PointCloud& cloud, const Calibration& calib,
                                           Index image_height, Index image_width) {
  std::map<std::int64_t, ProjectedPoint> best;
  for (const LidarPoint& p : cloud.points) {
    const Eigen::Vector3d cam = lidar_to_camera(Eigen::Vector3d(p.x, p.y, p.z), calib);
    const Eigen::Vector3d pix = calib.P2 * cam.homogeneous();
    const double depth = pix.z();
    if (depth <= 0.0) {
      continue;
    }
    ProjectedPoint proj;
    proj.u = pix.x() / depth;
    proj.v = pix.y() / depth;
    proj.depth = depth;
    proj.pixel_u = static_cast<int>(std::lround(proj.u));
    proj.pixel_v = static_cast<int>(std::lround(proj.v));
    if (proj.pixel_u < 0 || proj.pixel_u >= image_width || proj.pixel_v < 0 ||
        proj.pixel_v >= image_height) {
      continue;
    }
    const std::int64_t key = static_cast<std::int64_t>(proj.pixel_v) * image_width + proj.pixel_u;
    auto it = best.find(key);
    if (it == best.end() || proj.depth < it->second.depth) {
      best[key] = proj;
    }
  }
  std::vector<ProjectedPoint> out;
  out.reserve(best.size());
  for (const auto& [key, proj] : best) {
    out.push_back(proj);
  }
  return out;
}

ImageGrid sparse_depth_image(const std::vector<ProjectedPoint>& points, Index height, Index width) {
  ImageGrid depth(height, width, 1);
  for (const ProjectedPoint& p : points) {
    if (p.pixel_v < 0 || p.pixel_v >= height || p.pixel_u < 0 || p.pixel_u >= width) {
      throw ParameterError("sparse_depth_image: point outside the image");
    }
    depth(p.pixel_v, p.pixel_u) = p.depth;
  }
  return depth;
}

OrientedBox3D label_to_lidar_box(const ObjectLabel& label, const Calibration& calib) {
  OrientedBox3D box;
  const Eigen::Vector3d bottom_center =
      camera_to_lidar(Eigen::Vector3d(label.x, label.y, label.z), calib);
  box.center = bottom_center + Eigen::Vector3d(0.0, 0.0, 0.5 * label.height);
  box.length = label.length;
  box.width = label.width;
  box.height = label.height;
  box.yaw = wrap_angle(-label.rotation_y - M_PI / 2.0);
  return box;
}

ObjectLabel lidar_box_to_label(const OrientedBox3D& box, const Calibration& calib,
                               const std::string& class_name, Index image_height, Index image_width) {
  ObjectLabel label;
  label.class_name = class_name;
  label.height = box.height;
  label.width = box.width;
  label.length = box.length;
  const Eigen::Vector3d bottom_center = box.center - Eigen::Vector3d(0.0, 0.0, 0.5 * box.height);
  const Eigen::Vector3d cam = lidar_to_camera(bottom_center, calib);
  label.x = cam.x();
  label.y = cam.y();
  label.z = cam.z();
  label.rotation_y = wrap_angle(-box.yaw - M_PI / 2.0);
  label.alpha = wrap_angle(label.rotation_y - std::atan2(cam.x(), cam.z()));
  if (image_height > 0 && image_width > 0) {
    double u_min = 1e30, v_min = 1e30, u_max = -1e30, v_max = -1e30;
    for (const Eigen::Vector3d& corner : box_corners(box)) {
      const Eigen::Vector3d cam_corner = lidar_to_camera(corner, calib);
      const Eigen::Vector3d pix = calib.P2 * cam_corner.homogeneous();
      if (pix.z() <= 0.0) {
        continue;
      }
      u_min = std::min(u_min, pix.x() / pix.z());
      u_max = std::max(u_max, pix.x() / pix.z());
      v_min = std::min(v_min, pix.y() / pix.z());
      v_max = std::max(v_max, pix.y() / pix.z());
    }
    if (u_max >= u_min) {
      label.bbox_left = std::max(0.0, u_min);
      label.bbox_top = std::max(0.0, v_min);
      label.bbox_right = std::min(static_cast<double>(image_width - 1), u_max);
      label.bbox_bottom = std::min(static_cast<double>(image_height - 1), v_max);
    }
  }
  return label;
}

}  // namespace vr3dense
