#pragma once

// Hand-rolled random generators shared by the unit and acceptance tests.

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "splatgen/geometry.hpp"
#include "splatgen/losses.hpp"
#include "splatgen/splat_model.hpp"

namespace splatgen::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec3 random_vec(Rng& rng, double lo, double hi) {
  return {uniform(rng, lo, hi), uniform(rng, lo, hi), uniform(rng, lo, hi)};
}

/// Uniform random rotation from a normalized Gaussian 4-vector.
inline Eigen::Quaterniond random_rotation(Rng& rng) {
  std::normal_distribution<double> n;
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q;
}

inline CameraPose random_pose(Rng& rng, double extent = 2.0) {
  return {random_rotation(rng).toRotationMatrix(), random_vec(rng, -extent, extent)};
}

inline CameraIntrinsics random_intrinsics(Rng& rng, int width, int height) {
  const double f = uniform(rng, 0.6, 1.4) * width;
  return {f * uniform(rng, 0.9, 1.1), f, width * uniform(rng, 0.4, 0.6),
          height * uniform(rng, 0.4, 0.6), width, height};
}

/// Points in front of `pose` near the pixel rays (jittered off-ray so that
/// calibration has work to do), each valid with probability `valid_prob`.
inline Pointmap random_pointmap(Rng& rng, const CameraIntrinsics& intr,
                                const CameraPose& pose, double z_min = 0.5,
                                double z_max = 4.0, double valid_prob = 0.9,
                                double jitter = 0.05) {
  Pointmap pm(intr.width, intr.height);
  for (int v = 0; v < intr.height; ++v) {
    for (int u = 0; u < intr.width; ++u) {
      if (uniform(rng, 0.0, 1.0) > valid_prob) continue;
      const double z = uniform(rng, z_min, z_max);
      Vec3 p = intr.pixel_ray(u, v) * z;
      p.x() += jitter * uniform(rng, -1.0, 1.0);
      p.y() += jitter * uniform(rng, -1.0, 1.0);
      pm.points(u, v) = pose.to_world(p);
      pm.valid(u, v) = 1;
    }
  }
  return pm;
}

/// `count` Gaussians spread in front of the identity camera.
inline GaussianScene random_gaussian_scene(Rng& rng, int count, double z_min = 1.5,
                                           double z_max = 6.0) {
  GaussianScene scene;
  for (int i = 0; i < count; ++i) {
    Gaussian3D g;
    const double z = uniform(rng, z_min, z_max);
    g.mean = Vec3(uniform(rng, -0.7, 0.7) * z, uniform(rng, -0.7, 0.7) * z, z);
    g.opacity = uniform(rng, 0.05, 1.0);
    g.scale = Vec3(std::exp(uniform(rng, -3.5, -1.0)), std::exp(uniform(rng, -3.5, -1.0)),
                   std::exp(uniform(rng, -3.5, -1.0)));
    g.rotation = random_rotation(rng);
    g.color = random_vec(rng, 0.0, 1.0);
    scene.push_back(g);
  }
  return scene;
}

inline Grid<Vec3> random_grid(Rng& rng, int w, int h, double lo = -1.0, double hi = 1.0) {
  Grid<Vec3> g(w, h, Vec3::Zero());
  for (auto& p : g.data()) p = random_vec(rng, lo, hi);
  return g;
}

inline GeometryMaps random_geometry_maps(Rng& rng, int w, int h, double valid_prob = 0.8) {
  GeometryMaps m;
  m.pointmap = Pointmap(w, h);
  m.pointmap.points = random_grid(rng, w, h, -2.0, 2.0);
  for (auto& v : m.pointmap.valid.data()) v = uniform(rng, 0.0, 1.0) < valid_prob ? 1 : 0;
  m.raymap.origins = random_grid(rng, w, h);
  m.raymap.directions = random_grid(rng, w, h);
  return m;
}

// Pred geometry <-> flat parameter vector, 9 values per pixel.
inline std::vector<double> pack_geometry(const GeometryMaps& m) {
  std::vector<double> x;
  for (std::size_t i = 0; i < m.pointmap.points.size(); ++i) {
    for (const Vec3* p : {&m.pointmap.points[i], &m.raymap.origins[i], &m.raymap.directions[i]}) {
      x.insert(x.end(), p->data(), p->data() + 3);
    }
  }
  return x;
}

inline void unpack_geometry(std::span<const double> x, GeometryMaps& m) {
  for (std::size_t i = 0; i < m.pointmap.points.size(); ++i) {
    m.pointmap.points[i] = Vec3(x[9 * i], x[9 * i + 1], x[9 * i + 2]);
    m.raymap.origins[i] = Vec3(x[9 * i + 3], x[9 * i + 4], x[9 * i + 5]);
    m.raymap.directions[i] = Vec3(x[9 * i + 6], x[9 * i + 7], x[9 * i + 8]);
  }
}

inline void pack_geometry_grad(const GeometryGrad& g, std::span<double> out) {
  for (std::size_t i = 0; i < g.points.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      out[9 * i + c] = g.points[i][c];
      out[9 * i + 3 + c] = g.origins[i][c];
      out[9 * i + 6 + c] = g.directions[i][c];
    }
  }
}

inline Grid<double> random_weights(Rng& rng, const Pointmap& gt) {
  Grid<double> w(gt.width(), gt.height(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (gt.valid[i]) w[i] = uniform(rng, 0.1, 1.0);
  }
  return w;
}

}  // namespace splatgen::testing
