#include "splatgen/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace splatgen {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw std::invalid_argument("CameraIntrinsics: focal lengths must be > 0");
  }
  if (width < 1 || height < 1) {
    throw std::invalid_argument("CameraIntrinsics: image size must be >= 1");
  }
  if (!std::isfinite(cx) || !std::isfinite(cy)) {
    throw std::invalid_argument("CameraIntrinsics: non-finite principal point");
  }
}

CameraIntrinsics CameraIntrinsics::from_hfov(int width, int height,
                                             double hfov_deg) {
  const double half = hfov_deg * std::numbers::pi / 360.0;
  const double f = 0.5 * width / std::tan(half);
  CameraIntrinsics k{f, f, 0.5 * width, 0.5 * height, width, height};
  k.validate();
  return k;
}

CameraPose CameraPose::look_at(const Vec3& eye, const Vec3& target,
                               const Vec3& up) {
  const Vec3 forward = target - eye;
  if (forward.norm() == 0.0) {
    throw std::invalid_argument("look_at: eye coincides with target");
  }
  const Vec3 z = forward.normalized();
  const Vec3 x_raw = z.cross(up);
  if (x_raw.norm() < 1e-12 * up.norm()) {
    throw std::invalid_argument("look_at: up vector parallel to view direction");
  }
  const Vec3 x = x_raw.normalized();
  const Vec3 y = z.cross(x);
  CameraPose pose;
  pose.rotation.col(0) = x;
  pose.rotation.col(1) = y;
  pose.rotation.col(2) = z;
  pose.translation = eye;
  return pose;
}

CameraPose CameraPose::inverse() const {
  const Mat3 rt = rotation.transpose();
  return {rt, -(rt * translation)};
}

CameraPose CameraPose::operator*(const CameraPose& rhs) const {
  return {rotation * rhs.rotation, rotation * rhs.translation + translation};
}

void CameraPose::validate() const {
  const double err = (rotation.transpose() * rotation - Mat3::Identity()).norm();
  if (!(err <= 1e-9) || !(rotation.determinant() > 0.0)) {
    throw std::invalid_argument("CameraPose: rotation is not a proper rotation");
  }
  if (!translation.allFinite()) {
    throw std::invalid_argument("CameraPose: non-finite translation");
  }
}

bool CameraPose::is_identity(double tol) const {
  return (rotation - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         translation.cwiseAbs().maxCoeff() <= tol;
}

std::size_t Pointmap::valid_count() const {
  return static_cast<std::size_t>(
      std::count_if(valid.data().begin(), valid.data().end(),
                    [](std::uint8_t m) { return m != 0; }));
}

namespace {

void check_aligned(std::span<const CameraPose> poses,
                   std::span<const Pointmap> pointmaps) {
  if (poses.empty()) {
    throw std::invalid_argument("scene normalization: no cameras");
  }
  if (poses.size() != pointmaps.size()) {
    throw std::invalid_argument(
        "scene normalization: poses and pointmaps differ in count");
  }
}

Pointmap transform_points(const Pointmap& in, const CameraPose& t,
                          double scale) {
  Pointmap out = in;
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    if (out.valid[i]) out.points[i] = t.to_world(in.points[i]) * scale;
  }
  return out;
}

}  // namespace

NormalizedScene relativize_scene(std::span<const CameraPose> poses,
                                 std::span<const Pointmap> pointmaps) {
  check_aligned(poses, pointmaps);
  const CameraPose ref_inv = poses[0].inverse();

  NormalizedScene out;
  out.normalization.reference = poses[0];
  out.normalization.scale = 1.0;
  out.poses.reserve(poses.size());
  out.pointmaps.reserve(pointmaps.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    out.poses.push_back(ref_inv * poses[i]);
    out.pointmaps.push_back(transform_points(pointmaps[i], ref_inv, 1.0));
  }
  // Exact identity for the reference, free of round-off.
  out.poses[0] = CameraPose::identity();
  return out;
}

double mean_depth(const Pointmap& pointmap, const CameraPose& pose) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < pointmap.points.size(); ++i) {
    if (!pointmap.valid[i]) continue;
    sum += pose.to_camera(pointmap.points[i]).z();
    ++n;
  }
  if (n == 0) {
    throw std::invalid_argument("mean_depth: no valid pixels");
  }
  return sum / static_cast<double>(n);
}

NormalizedScene scale_mean_depth(NormalizedScene scene) {
  check_aligned(scene.poses, scene.pointmaps);
  const double mean = mean_depth(scene.pointmaps[0], scene.poses[0]);
  if (!(mean > 0.0) || !std::isfinite(mean)) {
    throw std::invalid_argument(
        "scale_mean_depth: first-view mean depth must be positive");
  }
  const double alpha = 1.0 / mean;
  for (auto& pose : scene.poses) pose = pose.scaled(alpha);
  for (auto& pm : scene.pointmaps) {
    for (std::size_t i = 0; i < pm.points.size(); ++i) {
      if (pm.valid[i]) pm.points[i] *= alpha;
    }
  }
  scene.normalization.scale *= alpha;
  return scene;
}

NormalizedScene normalize_scene(std::span<const CameraPose> poses,
                                std::span<const Pointmap> pointmaps) {
  return scale_mean_depth(relativize_scene(poses, pointmaps));
}

NormalizedScene denormalize_scene(const NormalizedScene& scene) {
  check_aligned(scene.poses, scene.pointmaps);
  const double inv_scale = 1.0 / scene.normalization.scale;
  const CameraPose& ref = scene.normalization.reference;

  NormalizedScene out;
  for (const auto& pose : scene.poses) {
    out.poses.push_back(ref * pose.scaled(inv_scale));
  }
  for (const auto& pm : scene.pointmaps) {
    Pointmap p = pm;
    for (std::size_t i = 0; i < p.points.size(); ++i) {
      if (p.valid[i]) p.points[i] = ref.to_world(pm.points[i] * inv_scale);
    }
    out.pointmaps.push_back(std::move(p));
  }
  return out;
}

MaxXyzScaling scale_max_xyz(std::span<const Pointmap> pointmaps) {
  double max_abs = 0.0;
  std::size_t n = 0;
  for (const auto& pm : pointmaps) {
    for (std::size_t i = 0; i < pm.points.size(); ++i) {
      if (!pm.valid[i]) continue;
      max_abs = std::max(max_abs, pm.points[i].cwiseAbs().maxCoeff());
      ++n;
    }
  }
  if (n == 0) throw std::invalid_argument("scale_max_xyz: no valid points");
  if (!(max_abs > 0.0)) {
    throw std::invalid_argument("scale_max_xyz: all points at the origin");
  }
  MaxXyzScaling out;
  out.scale = 1.0 / max_abs;
  for (const auto& pm : pointmaps) {
    out.pointmaps.push_back(
        transform_points(pm, CameraPose::identity(), out.scale));
  }
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double y) {
  if (!(y > 0.0 && y < 1.0)) {
    throw std::domain_error("logit: argument outside (0, 1)");
  }
  return std::log(y) - std::log1p(-y);
}

Pointmap contract(const Pointmap& pointmap) {
  Pointmap out = pointmap;
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    if (!out.valid[i]) continue;
    for (int c = 0; c < 3; ++c) out.points[i][c] = sigmoid(pointmap.points[i][c]);
  }
  return out;
}

Pointmap uncontract(const Pointmap& pointmap) {
  Pointmap out = pointmap;
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    if (!out.valid[i]) continue;
    for (int c = 0; c < 3; ++c) out.points[i][c] = logit(pointmap.points[i][c]);
  }
  return out;
}

Raymap compute_raymap(const CameraIntrinsics& intrinsics,
                      const CameraPose& pose) {
  intrinsics.validate();
  Raymap rays;
  rays.origins = Grid<Vec3>(intrinsics.width, intrinsics.height, pose.center());
  rays.directions = Grid<Vec3>(intrinsics.width, intrinsics.height);
  for (int v = 0; v < intrinsics.height; ++v) {
    for (int u = 0; u < intrinsics.width; ++u) {
      rays.directions(u, v) =
          (pose.rotation * intrinsics.pixel_ray(u, v)).normalized();
    }
  }
  return rays;
}

Pointmap unproject_depth(const CameraIntrinsics& intrinsics,
                         const CameraPose& pose, const DepthMap& depth) {
  intrinsics.validate();
  if (depth.width() != intrinsics.width || depth.height() != intrinsics.height) {
    throw std::invalid_argument("unproject_depth: depth map size mismatch");
  }
  Pointmap out(intrinsics.width, intrinsics.height);
  for (int v = 0; v < intrinsics.height; ++v) {
    for (int u = 0; u < intrinsics.width; ++u) {
      if (!depth.valid(u, v)) continue;
      const double z = depth.depth(u, v);
      if (!(z > 0.0) || !std::isfinite(z)) {
        throw std::invalid_argument("unproject_depth: non-positive depth at pixel (" +
                                    std::to_string(u) + ", " +
                                    std::to_string(v) + ")");
      }
      out.points(u, v) = pose.to_world(intrinsics.pixel_ray(u, v) * z);
      out.valid(u, v) = 1;
    }
  }
  return out;
}

std::optional<PixelProjection> project_point(const CameraIntrinsics& intrinsics,
                                             const CameraPose& pose,
                                             const Vec3& point) {
  const Vec3 p = pose.to_camera(point);
  if (!(p.z() > 0.0)) return std::nullopt;
  return PixelProjection{intrinsics.fx * p.x() / p.z() + intrinsics.cx,
                         intrinsics.fy * p.y() / p.z() + intrinsics.cy, p.z()};
}

double rec_weight(const Vec3& point_camera_local) {
  const double d2 = (point_camera_local - Vec3(0.0, 0.0, 1.0)).squaredNorm();
  const double w = std::max(1.0, d2);
  return (2.0 * std::sqrt(w) - 1.0) / w;
}

Grid<double> rec_weights(const Pointmap& gt, const CameraPose& pose) {
  Grid<double> w(gt.width(), gt.height(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (gt.valid[i]) w[i] = rec_weight(pose.to_camera(gt.points[i]));
  }
  return w;
}

}  // namespace splatgen
