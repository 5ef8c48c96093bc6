#include "splatgen/renderer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace splatgen {

namespace {

// A Gaussian after projection into the image plane.
struct Splat {
  double depth = 0.0;
  double mx = 0.0;  // projected mean, continuous pixel coordinates
  double my = 0.0;
  double ia = 0.0;  // inverse 2x2 covariance [[ia, ib], [ib, ic]]
  double ib = 0.0;
  double ic = 0.0;
  double opacity = 0.0;
  Vec3 color = Vec3::Zero();
  double radius = 0.0;  // pixels beyond which alpha < min_alpha
};

struct Projection {
  std::vector<Splat> splats;  // sorted front to back
  std::size_t skipped_degenerate = 0;
};

Projection project_scene(const GaussianScene& scene,
                         const CameraIntrinsics& intr, const CameraPose& pose,
                         const RenderOptions& opt) {
  intr.validate();
  const Mat3 world_to_cam = pose.rotation.transpose();

  Projection out;
  std::vector<Splat> splats;
  std::vector<std::size_t> order;
  splats.reserve(scene.size());
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const Gaussian3D& g = scene.gaussians[i];
    if (g.opacity < opt.min_alpha) continue;
    const Vec3 t = pose.to_camera(g.mean);
    if (!(t.z() > opt.near_plane)) continue;

    // Local affine approximation of the perspective projection at the mean.
    Eigen::Matrix<double, 2, 3> jac;
    const double iz = 1.0 / t.z();
    jac << intr.fx * iz, 0.0, -intr.fx * t.x() * iz * iz,  //
        0.0, intr.fy * iz, -intr.fy * t.y() * iz * iz;
    const Eigen::Matrix<double, 2, 3> jw = jac * world_to_cam;
    Mat2 cov = jw * g.covariance() * jw.transpose();
    cov(0, 0) += opt.dilation;
    cov(1, 1) += opt.dilation;

    const double a = cov(0, 0);
    const double b = 0.5 * (cov(0, 1) + cov(1, 0));
    const double c = cov(1, 1);
    const double det = a * c - b * b;
    const double mid = 0.5 * (a + c);
    const double disc = std::sqrt(std::max(0.0, mid * mid - det));
    const double lmax = mid + disc;
    const double lmin = mid - disc;
    if (!std::isfinite(det) || !(lmin > 0.0) || !(det > 0.0) ||
        lmax / lmin > opt.max_condition) {
      ++out.skipped_degenerate;
      continue;
    }

    Splat s;
    s.depth = t.z();
    s.mx = intr.fx * t.x() * iz + intr.cx;
    s.my = intr.fy * t.y() * iz + intr.cy;
    s.ia = c / det;
    s.ib = -b / det;
    s.ic = a / det;
    s.opacity = g.opacity;
    s.color = g.color;
    // opacity * exp(-r^2 / (2 lmax)) == min_alpha, padded against round-off.
    const double log_ratio = std::log(g.opacity / opt.min_alpha);
    s.radius = std::sqrt(2.0 * std::max(0.0, log_ratio) * lmax) * (1.0 + 1e-9) + 1e-9;
    splats.push_back(s);
    order.push_back(order.size());
  }

  // Canonical front-to-back order; ties keep input order.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return splats[l].depth < splats[r].depth;
  });
  out.splats.reserve(splats.size());
  for (std::size_t idx : order) out.splats.push_back(splats[idx]);
  return out;
}

RenderedImage blank_image(const CameraIntrinsics& intr) {
  RenderedImage img;
  img.rgb = Image(intr.width, intr.height, 3);
  img.alpha = Image(intr.width, intr.height, 1);
  img.depth = Image(intr.width, intr.height, 1);
  return img;
}

// Front-to-back compositing at one pixel over `ids` (indices into splats,
// ascending).
template <typename IdRange>
void shade_pixel(const std::vector<Splat>& splats, const IdRange& ids, int u,
                 int v, const RenderOptions& opt, RenderedImage& img) {
  const double px = u + 0.5;
  const double py = v + 0.5;
  double transmittance = 1.0;
  Vec3 color = Vec3::Zero();
  double depth = 0.0;
  for (const auto id : ids) {
    const Splat& s = splats[id];
    const double dx = px - s.mx;
    const double dy = py - s.my;
    const double power = -0.5 * (s.ia * dx * dx + 2.0 * s.ib * dx * dy + s.ic * dy * dy);
    const double alpha = std::min(1.0, s.opacity * std::exp(power));
    if (alpha < opt.min_alpha) continue;
    const double w = alpha * transmittance;
    color += w * s.color;
    depth += w * s.depth;
    transmittance *= 1.0 - alpha;
  }
  const Vec3 rgb = color + transmittance * opt.background;
  for (int c = 0; c < 3; ++c) img.rgb.at(u, v, c) = rgb[c];
  const double acc = 1.0 - transmittance;
  img.alpha.at(u, v, 0) = acc;
  img.depth.at(u, v, 0) = acc > 1e-12 ? depth / acc : 0.0;
}

unsigned worker_count(const RenderOptions& opt) {
  if (opt.threads > 0) return opt.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

RenderedImage render_reference(const GaussianScene& scene,
                               const CameraIntrinsics& intrinsics,
                               const CameraPose& pose,
                               const RenderOptions& options) {
  const Projection proj = project_scene(scene, intrinsics, pose, options);
  RenderedImage img = blank_image(intrinsics);
  img.skipped_degenerate = proj.skipped_degenerate;
  std::vector<std::size_t> all(proj.splats.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (int v = 0; v < intrinsics.height; ++v) {
    for (int u = 0; u < intrinsics.width; ++u) {
      shade_pixel(proj.splats, all, u, v, options, img);
    }
  }
  return img;
}

RenderedImage render_tiled(const GaussianScene& scene,
                           const CameraIntrinsics& intrinsics,
                           const CameraPose& pose, int tile_size,
                           const RenderOptions& options) {
  if (tile_size < 1) throw std::invalid_argument("render_tiled: tile_size < 1");
  const Projection proj = project_scene(scene, intrinsics, pose, options);
  RenderedImage img = blank_image(intrinsics);
  img.skipped_degenerate = proj.skipped_degenerate;

  const int w = intrinsics.width;
  const int h = intrinsics.height;
  const int tiles_x = (w + tile_size - 1) / tile_size;
  const int tiles_y = (h + tile_size - 1) / tile_size;
  std::vector<std::vector<std::uint32_t>> bins(
      static_cast<std::size_t>(tiles_x) * tiles_y);

  for (std::size_t i = 0; i < proj.splats.size(); ++i) {
    const Splat& s = proj.splats[i];
    // Pixels whose centers fall inside the square [m - r, m + r].
    const double u_lo = std::ceil(s.mx - s.radius - 0.5);
    const double u_hi = std::floor(s.mx + s.radius - 0.5);
    const double v_lo = std::ceil(s.my - s.radius - 0.5);
    const double v_hi = std::floor(s.my + s.radius - 0.5);
    if (u_hi < 0.0 || v_hi < 0.0 || u_lo > w - 1 || v_lo > h - 1 || u_lo > u_hi ||
        v_lo > v_hi) {
      continue;
    }
    const int u0 = static_cast<int>(std::max(0.0, u_lo));
    const int u1 = static_cast<int>(std::min<double>(w - 1, u_hi));
    const int v0 = static_cast<int>(std::max(0.0, v_lo));
    const int v1 = static_cast<int>(std::min<double>(h - 1, v_hi));
    for (int ty = v0 / tile_size; ty <= v1 / tile_size; ++ty) {
      for (int tx = u0 / tile_size; tx <= u1 / tile_size; ++tx) {
        bins[static_cast<std::size_t>(ty) * tiles_x + tx].push_back(
            static_cast<std::uint32_t>(i));
      }
    }
  }

  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t t = next++; t < bins.size(); t = next++) {
      const int tx = static_cast<int>(t % tiles_x);
      const int ty = static_cast<int>(t / tiles_x);
      const int u_end = std::min(w, (tx + 1) * tile_size);
      const int v_end = std::min(h, (ty + 1) * tile_size);
      for (int v = ty * tile_size; v < v_end; ++v) {
        for (int u = tx * tile_size; u < u_end; ++u) {
          shade_pixel(proj.splats, bins[t], u, v, options, img);
        }
      }
    }
  };
  const unsigned n_threads =
      std::min<unsigned>(worker_count(options), static_cast<unsigned>(bins.size()));
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < n_threads; ++k) pool.emplace_back(work);
  }
  return img;
}

// --- Ray tracing -------------------------------------------------------------

void SyntheticScene::validate() const {
  for (const auto& p : primitives) {
    if (const auto* s = std::get_if<Sphere>(&p.shape)) {
      if (!(s->radius > 0.0)) throw std::invalid_argument("Sphere: radius <= 0");
    } else if (const auto* b = std::get_if<Box>(&p.shape)) {
      if (!(b->half_size.minCoeff() > 0.0)) {
        throw std::invalid_argument("Box: non-positive size");
      }
    } else if (const auto* pl = std::get_if<Plane>(&p.shape)) {
      if (!(pl->normal.norm() > 0.0)) throw std::invalid_argument("Plane: zero normal");
    }
  }
  if (!(light_direction.norm() > 0.0)) {
    throw std::invalid_argument("SyntheticScene: zero light direction");
  }
}

namespace {

std::optional<RayHit> hit_sphere(const Sphere& s, const Vec3& o, const Vec3& d,
                                 double t_min) {
  const Vec3 oc = o - s.center;
  const double a = d.squaredNorm();
  const double half_b = oc.dot(d);
  const double c = oc.squaredNorm() - s.radius * s.radius;
  const double disc = half_b * half_b - a * c;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  double t = (-half_b - sq) / a;
  if (t <= t_min) t = (-half_b + sq) / a;
  if (t <= t_min) return std::nullopt;
  return RayHit{t, (o + t * d - s.center) / s.radius};
}

std::optional<RayHit> hit_plane(const Plane& p, const Vec3& o, const Vec3& d,
                                double t_min) {
  const Vec3 n = p.normal.normalized();
  const double denom = n.dot(d);
  if (std::abs(denom) < 1e-15) return std::nullopt;
  const double t = n.dot(p.point - o) / denom;
  if (t <= t_min) return std::nullopt;
  return RayHit{t, n};
}

std::optional<RayHit> hit_box(const Box& b, const Vec3& o, const Vec3& d,
                              double t_min) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  int near_axis = -1;
  int far_axis = -1;
  for (int k = 0; k < 3; ++k) {
    const double lo = b.center[k] - b.half_size[k];
    const double hi = b.center[k] + b.half_size[k];
    if (d[k] == 0.0) {
      if (o[k] < lo || o[k] > hi) return std::nullopt;
      continue;
    }
    double t0 = (lo - o[k]) / d[k];
    double t1 = (hi - o[k]) / d[k];
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > t_near) {
      t_near = t0;
      near_axis = k;
    }
    if (t1 < t_far) {
      t_far = t1;
      far_axis = k;
    }
  }
  if (t_near > t_far) return std::nullopt;
  double t = t_near;
  int axis = near_axis;
  if (t <= t_min) {
    t = t_far;
    axis = far_axis;
  }
  if (t <= t_min || axis < 0) return std::nullopt;
  Vec3 n = Vec3::Zero();
  const Vec3 p = o + t * d;
  n[axis] = p[axis] > b.center[axis] ? 1.0 : -1.0;
  return RayHit{t, n};
}

}  // namespace

std::optional<RayHit> intersect(const Shape& shape, const Vec3& origin,
                                const Vec3& dir, double t_min) {
  return std::visit(
      [&](const auto& s) -> std::optional<RayHit> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          return hit_sphere(s, origin, dir, t_min);
        } else if constexpr (std::is_same_v<T, Plane>) {
          return hit_plane(s, origin, dir, t_min);
        } else {
          return hit_box(s, origin, dir, t_min);
        }
      },
      shape);
}

TracedView raytrace_synthetic(const SyntheticScene& scene,
                              const CameraIntrinsics& intrinsics,
                              const CameraPose& pose) {
  intrinsics.validate();
  scene.validate();
  constexpr double kAmbient = 0.25;

  TracedView out;
  out.image = blank_image(intrinsics);
  out.depth = DepthMap(intrinsics.width, intrinsics.height);
  const Vec3 origin = pose.center();
  const Vec3 light = scene.light_direction.normalized();
  for (int v = 0; v < intrinsics.height; ++v) {
    for (int u = 0; u < intrinsics.width; ++u) {
      // Camera-frame z of the direction is 1, so t is the camera-frame depth.
      const Vec3 dir = pose.rotation * intrinsics.pixel_ray(u, v);
      std::optional<RayHit> best;
      const Primitive* best_prim = nullptr;
      for (const auto& prim : scene.primitives) {
        auto hit = intersect(prim.shape, origin, dir);
        if (hit && (!best || hit->t < best->t)) {
          best = hit;
          best_prim = &prim;
        }
      }
      Vec3 rgb = scene.background;
      if (best) {
        // Light the side of the surface that faces the viewer.
        const Vec3 n = best->normal.dot(dir) < 0.0 ? best->normal : Vec3(-best->normal);
        const double lambert = std::max(0.0, n.dot(light));
        rgb = best_prim->albedo * (kAmbient + (1.0 - kAmbient) * lambert);
        rgb = rgb.cwiseMax(0.0).cwiseMin(1.0);
        out.depth.depth(u, v) = best->t;
        out.depth.valid(u, v) = 1;
        out.image.alpha.at(u, v, 0) = 1.0;
        out.image.depth.at(u, v, 0) = best->t;
      }
      for (int c = 0; c < 3; ++c) out.image.rgb.at(u, v, c) = rgb[c];
    }
  }
  return out;
}

}  // namespace splatgen
