#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <optional>
#include <span>
#include <vector>

#include "splatgen/grid.hpp"

namespace splatgen {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

/// Pinhole intrinsics in pixels. Pixel (u, v) samples its center at
/// (u + 0.5, v + 0.5).
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.5;
  double cy = 0.5;
  int width = 1;
  int height = 1;

  void validate() const;

  /// Square-pixel camera with the principal point at the image center.
  static CameraIntrinsics from_hfov(int width, int height, double hfov_deg);

  /// Camera-frame direction through the center of pixel (u, v), with z = 1.
  Vec3 pixel_ray(int u, int v) const {
    return {(u + 0.5 - cx) / fx, (v + 0.5 - cy) / fy, 1.0};
  }
};

/// Rigid camera-to-world transform. Camera frame: x right, y down, z forward.
struct CameraPose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static CameraPose identity() { return {}; }

  /// Camera at `eye` looking at `target`; image "up" follows `up`.
  static CameraPose look_at(const Vec3& eye, const Vec3& target,
                            const Vec3& up);

  const Vec3& center() const { return translation; }
  Vec3 to_world(const Vec3& p_camera) const {
    return rotation * p_camera + translation;
  }
  Vec3 to_camera(const Vec3& p_world) const {
    return rotation.transpose() * (p_world - translation);
  }

  CameraPose inverse() const;
  CameraPose operator*(const CameraPose& rhs) const;
  /// Uniform scene scaling: the translation is multiplied by `s`.
  CameraPose scaled(double s) const { return {rotation, translation * s}; }

  /// Throws if the rotation is not orthonormal with det +1 (tolerance 1e-9).
  void validate() const;
  bool is_identity(double tol = 1e-9) const;
};

struct Camera {
  CameraIntrinsics intrinsics;
  CameraPose pose;
};

struct Pointmap {
  Grid<Vec3> points;
  Mask valid;

  Pointmap() = default;
  Pointmap(int width, int height)
      : points(width, height, Vec3::Zero()), valid(width, height, 0) {}

  int width() const { return points.width(); }
  int height() const { return points.height(); }
  std::size_t valid_count() const;
};

struct DepthMap {
  Grid<double> depth;
  Mask valid;

  DepthMap() = default;
  DepthMap(int width, int height)
      : depth(width, height, 0.0), valid(width, height, 0) {}

  int width() const { return depth.width(); }
  int height() const { return depth.height(); }
};

struct Raymap {
  Grid<Vec3> origins;
  Grid<Vec3> directions;

  int width() const { return origins.width(); }
  int height() const { return origins.height(); }
};

struct SceneNormalization {
  double scale = 1.0;
  /// The first input camera, whose inverse was applied to the scene.
  CameraPose reference;
};

struct NormalizedScene {
  std::vector<CameraPose> poses;
  std::vector<Pointmap> pointmaps;
  SceneNormalization normalization;
};

/// Expresses poses and points in the frame of the first camera.
NormalizedScene relativize_scene(std::span<const CameraPose> poses,
                                 std::span<const Pointmap> pointmaps);

/// Scales the scene so the mean camera-frame depth of the valid pixels of
/// view 0 is 1. Composes with the existing normalization record.
NormalizedScene scale_mean_depth(NormalizedScene scene);

NormalizedScene normalize_scene(std::span<const CameraPose> poses,
                                std::span<const Pointmap> pointmaps);

/// Inverse of normalize_scene: returns the scene in its original frame.
NormalizedScene denormalize_scene(const NormalizedScene& scene);

/// Mean camera-frame z over the valid pixels of `pointmap`.
double mean_depth(const Pointmap& pointmap, const CameraPose& pose);

struct MaxXyzScaling {
  std::vector<Pointmap> pointmaps;
  double scale = 1.0;
};

/// Scales so the largest |coordinate| over all valid points is 1.
MaxXyzScaling scale_max_xyz(std::span<const Pointmap> pointmaps);

double sigmoid(double x);
/// Inverse sigmoid; throws std::domain_error outside (0, 1).
double logit(double y);

/// Per-coordinate sigmoid on valid points.
Pointmap contract(const Pointmap& pointmap);
/// Per-coordinate logit on valid points.
Pointmap uncontract(const Pointmap& pointmap);

Raymap compute_raymap(const CameraIntrinsics& intrinsics,
                      const CameraPose& pose);

Pointmap unproject_depth(const CameraIntrinsics& intrinsics,
                         const CameraPose& pose, const DepthMap& depth);

struct PixelProjection {
  double u = 0.0;
  double v = 0.0;
  double z = 0.0;
};

/// Continuous pixel coordinates (pixel centers at k + 0.5) and camera-frame
/// depth. Empty when the point is not in front of the camera.
std::optional<PixelProjection> project_point(const CameraIntrinsics& intrinsics,
                                             const CameraPose& pose,
                                             const Vec3& point);

/// Reconstruction-loss weight of a point given in camera-local coordinates:
/// (2 sqrt(w) - 1) / w with w = max(1, |x - (0,0,1)|^2).
double rec_weight(const Vec3& point_camera_local);

/// rec_weight for every pixel of `gt`, evaluated in the camera of `pose`.
/// Invalid pixels get weight 0.
Grid<double> rec_weights(const Pointmap& gt, const CameraPose& pose);

}  // namespace splatgen
