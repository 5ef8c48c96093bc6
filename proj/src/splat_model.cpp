#include "splatgen/splat_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace splatgen {

Mat3 Gaussian3D::covariance() const {
  const Mat3 r = rotation.normalized().toRotationMatrix();
  return r * scale.cwiseAbs2().asDiagonal() * r.transpose();
}

void Gaussian3D::validate() const {
  if (!mean.allFinite()) throw std::invalid_argument("Gaussian3D: bad mean");
  if (!(opacity >= 0.0 && opacity <= 1.0)) {
    throw std::invalid_argument("Gaussian3D: opacity outside [0, 1]");
  }
  if (!(scale.minCoeff() > 0.0) || !scale.allFinite()) {
    throw std::invalid_argument("Gaussian3D: non-positive scale");
  }
  if (!(std::abs(rotation.norm() - 1.0) <= 1e-9)) {
    throw std::invalid_argument("Gaussian3D: rotation is not a unit quaternion");
  }
  if (!color.allFinite()) throw std::invalid_argument("Gaussian3D: bad color");
}

std::size_t SplatterImage::valid_count() const {
  return static_cast<std::size_t>(
      std::count_if(valid.data().begin(), valid.data().end(),
                    [](std::uint8_t m) { return m != 0; }));
}

Pointmap calibrate_pointmap(const Pointmap& pointmap,
                            const CameraIntrinsics& intrinsics,
                            const CameraPose& pose) {
  intrinsics.validate();
  if (pointmap.width() != intrinsics.width ||
      pointmap.height() != intrinsics.height) {
    throw std::invalid_argument("calibrate_pointmap: size mismatch with camera");
  }
  Pointmap out = pointmap;
  for (int v = 0; v < intrinsics.height; ++v) {
    for (int u = 0; u < intrinsics.width; ++u) {
      if (!out.valid(u, v)) continue;
      const double z = pose.to_camera(pointmap.points(u, v)).z();
      if (!(z > 0.0)) {
        out.valid(u, v) = 0;
        continue;
      }
      out.points(u, v) = pose.to_world(intrinsics.pixel_ray(u, v) * z);
    }
  }
  return out;
}

namespace {

// World rotation whose third column is the viewing ray and whose first column
// follows the camera x axis.
Eigen::Quaterniond ray_aligned_rotation(const CameraPose& pose,
                                        const Vec3& ray_camera) {
  const Vec3 z = ray_camera.normalized();
  Vec3 x = Vec3::UnitX() - z * z.x();
  x.normalize();
  const Vec3 y = z.cross(x);
  Mat3 local;
  local.col(0) = x;
  local.col(1) = y;
  local.col(2) = z;
  Eigen::Quaterniond q(pose.rotation * local);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  return q;
}

}  // namespace

std::vector<SplatterImage> analytic_gaussian_head(
    std::span<const Image> images, std::span<const Pointmap> pointmaps,
    std::span<const Camera> cameras, const HeadParams& params) {
  if (images.size() != pointmaps.size() || images.size() != cameras.size()) {
    throw std::invalid_argument("analytic_gaussian_head: list lengths differ");
  }
  const double opacity = sigmoid(params.opacity_logit);
  const double size_gain = std::exp(params.log_scale);

  std::vector<SplatterImage> out;
  out.reserve(images.size());
  for (std::size_t k = 0; k < images.size(); ++k) {
    const Image& img = images[k];
    const Pointmap& pm = pointmaps[k];
    const CameraIntrinsics& intr = cameras[k].intrinsics;
    const CameraPose& pose = cameras[k].pose;
    intr.validate();
    if (img.channels() != 3 || img.width() != intr.width ||
        img.height() != intr.height || pm.width() != intr.width ||
        pm.height() != intr.height) {
      throw std::invalid_argument(
          "analytic_gaussian_head: image/pointmap/camera dimension mismatch");
    }
    const Vec3 footprint(1.0 / intr.fx, 1.0 / intr.fy,
                         1.0 / std::sqrt(intr.fx * intr.fy));

    SplatterImage si;
    si.camera = cameras[k];
    si.gaussians = Grid<Gaussian3D>(intr.width, intr.height);
    si.valid = Mask(intr.width, intr.height, 0);
    for (int v = 0; v < intr.height; ++v) {
      for (int u = 0; u < intr.width; ++u) {
        if (!pm.valid(u, v)) continue;
        const double z = pose.to_camera(pm.points(u, v)).z();
        if (!(z > 0.0)) continue;
        Gaussian3D g;
        g.mean = pm.points(u, v);
        g.opacity = opacity;
        g.scale = size_gain * z * footprint;
        g.rotation = ray_aligned_rotation(pose, intr.pixel_ray(u, v));
        g.color = Vec3(img.at(u, v, 0), img.at(u, v, 1), img.at(u, v, 2));
        si.gaussians(u, v) = g;
        si.valid(u, v) = 1;
      }
    }
    out.push_back(std::move(si));
  }
  return out;
}

GaussianScene merge_splatter_images(std::span<const SplatterImage> images) {
  GaussianScene scene;
  std::size_t total = 0;
  for (const auto& si : images) total += si.valid_count();
  scene.gaussians.reserve(total);
  scene.source.reserve(total);
  for (std::size_t k = 0; k < images.size(); ++k) {
    const auto& si = images[k];
    for (int v = 0; v < si.gaussians.height(); ++v) {
      for (int u = 0; u < si.gaussians.width(); ++u) {
        if (si.valid(u, v)) {
          scene.push_back(si.gaussians(u, v),
                          {static_cast<int>(k), u, v});
        }
      }
    }
  }
  return scene;
}

GaussianScene cull_transparent(const GaussianScene& scene, double threshold) {
  GaussianScene out;
  for (std::size_t i = 0; i < scene.size(); ++i) {
    if (scene.gaussians[i].opacity >= threshold) {
      out.push_back(scene.gaussians[i],
                    i < scene.source.size() ? scene.source[i] : Provenance{});
    }
  }
  return out;
}

}  // namespace splatgen
