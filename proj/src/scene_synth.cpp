#include "splatgen/scene_synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace splatgen {

namespace {

constexpr double kFloorY = -1.0;

Vec3 random_albedo(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(0.2, 0.95);
  return {d(rng), d(rng), d(rng)};
}

}  // namespace

SyntheticScene generate_scene(std::uint64_t seed, int complexity) {
  if (complexity < 0) throw std::invalid_argument("generate_scene: complexity < 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  SyntheticScene scene;
  if (complexity == 0) {
    Sphere s{{uniform(-0.2, 0.2), uniform(-0.2, 0.2), uniform(-0.2, 0.2)},
             uniform(0.4, 0.7)};
    scene.primitives.push_back({s, random_albedo(rng)});
    return scene;
  }

  Sphere hero{{uniform(-0.3, 0.3), uniform(-0.5, 0.0), uniform(-0.3, 0.3)},
              uniform(0.3, 0.5)};
  scene.primitives.push_back({hero, random_albedo(rng)});
  Box floor{{0.0, kFloorY - 0.05, 0.0}, {1.5, 0.05, 1.5}};
  scene.primitives.push_back({floor, Vec3::Constant(uniform(0.5, 0.8))});

  for (int i = 0; i < complexity; ++i) {
    const double size = uniform(0.15, 0.35);
    const double x = uniform(-0.8, 0.8);
    const double z = uniform(-0.8, 0.8);
    if (i % 2 == 0) {
      const double half_y = size * uniform(0.6, 1.5);
      Box b{{x, kFloorY + half_y, z}, {size, half_y, size * uniform(0.7, 1.3)}};
      scene.primitives.push_back({b, random_albedo(rng)});
    } else {
      Sphere s{{x, kFloorY + size, z}, size};
      scene.primitives.push_back({s, random_albedo(rng)});
    }
  }
  return scene;
}

CameraPose default_camera_pose() {
  return CameraPose::look_at({0.0, 0.8, -3.0}, Vec3::Zero(), Vec3::UnitY());
}

std::vector<CameraPose> orbit_poses(int count, double radius, double height,
                                    double arc_deg) {
  if (count < 1) throw std::invalid_argument("orbit_poses: count < 1");
  std::vector<CameraPose> poses;
  const double arc = arc_deg * std::numbers::pi / 180.0;
  for (int k = 0; k < count; ++k) {
    const double phi = count == 1 ? 0.0 : arc * k / (count - 1);
    const Vec3 eye(radius * std::sin(phi), height, -radius * std::cos(phi));
    poses.push_back(CameraPose::look_at(eye, Vec3::Zero(), Vec3::UnitY()));
  }
  return poses;
}

PathKind parse_path_kind(std::string_view name) {
  if (name == "circular") return PathKind::kCircular;
  if (name == "forward-facing") return PathKind::kForwardFacing;
  if (name == "spline") return PathKind::kSpline;
  throw std::invalid_argument("unknown camera path kind: " + std::string(name));
}

std::string_view to_string(PathKind kind) {
  switch (kind) {
    case PathKind::kCircular:
      return "circular";
    case PathKind::kForwardFacing:
      return "forward-facing";
    case PathKind::kSpline:
      return "spline";
  }
  return "unknown";
}

namespace {

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

CameraPath circular_path(std::span<const CameraPose> inputs, int n,
                         const PathOptions& opt) {
  const Vec3 up = opt.up.normalized();
  // Fixed in-plane basis; angles are measured from e1 towards e2.
  const Vec3 seed_axis = std::abs(up.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitZ();
  const Vec3 e1 = (seed_axis - up * up.dot(seed_axis)).normalized();
  const Vec3 e2 = up.cross(e1);

  std::vector<double> radii;
  std::vector<double> heights;
  for (const auto& pose : inputs) {
    const Vec3 r = pose.center() - opt.center;
    const double h = r.dot(up);
    radii.push_back((r - h * up).norm());
    heights.push_back(h);
  }
  const double radius = median(radii);
  const double height = median(heights);
  if (!(radius > 0.0)) {
    throw std::invalid_argument("circular path: median radius is zero");
  }
  const Vec3 r0 = inputs[0].center() - opt.center;
  const Vec3 radial0 = r0 - up * r0.dot(up);
  const double theta0 =
      radial0.norm() > 0.0 ? std::atan2(radial0.dot(e2), radial0.dot(e1)) : 0.0;

  CameraPath path{PathKind::kCircular, {}};
  for (int k = 0; k < n; ++k) {
    const double theta = theta0 + 2.0 * std::numbers::pi * k / n;
    const Vec3 eye = opt.center + height * up +
                     radius * (std::cos(theta) * e1 + std::sin(theta) * e2);
    path.poses.push_back(CameraPose::look_at(eye, opt.center, up));
  }
  return path;
}

CameraPath forward_facing_path(std::span<const CameraPose> inputs, int n,
                               const PathOptions& opt) {
  const CameraPose& base = inputs[0];
  CameraPath path{PathKind::kForwardFacing, {}};
  for (int k = 0; k < n; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / n;
    const Vec3 offset = opt.forward_offset *
                        Vec3(std::cos(theta), std::sin(theta), 0.5 * std::sin(0.5 * theta));
    CameraPose pose = base;
    pose.translation = base.to_world(offset);
    path.poses.push_back(pose);
  }
  return path;
}

// Centripetal Catmull-Rom (Barry-Goldman form) between p1 and p2, u in [0, 1].
Vec3 catmull_rom(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3,
                 double u) {
  auto knot = [](const Vec3& a, const Vec3& b) {
    return std::max(std::sqrt((b - a).norm()), 1e-9);
  };
  const double t0 = 0.0;
  const double t1 = t0 + knot(p0, p1);
  const double t2 = t1 + knot(p1, p2);
  const double t3 = t2 + knot(p2, p3);
  const double t = t1 + u * (t2 - t1);
  const Vec3 a1 = (t1 - t) / (t1 - t0) * p0 + (t - t0) / (t1 - t0) * p1;
  const Vec3 a2 = (t2 - t) / (t2 - t1) * p1 + (t - t1) / (t2 - t1) * p2;
  const Vec3 a3 = (t3 - t) / (t3 - t2) * p2 + (t - t2) / (t3 - t2) * p3;
  const Vec3 b1 = (t2 - t) / (t2 - t0) * a1 + (t - t0) / (t2 - t0) * a2;
  const Vec3 b2 = (t3 - t) / (t3 - t1) * a2 + (t - t1) / (t3 - t1) * a3;
  return (t2 - t) / (t2 - t1) * b1 + (t - t1) / (t2 - t1) * b2;
}

CameraPath spline_path(std::span<const CameraPose> inputs, int n) {
  CameraPath path{PathKind::kSpline, {}};
  const int m = static_cast<int>(inputs.size());
  if (m == 1) {
    path.poses.assign(n, inputs[0]);
    return path;
  }
  auto center = [&](int i) -> Vec3 {
    if (i < 0) return 2.0 * inputs[0].center() - inputs[1].center();
    if (i >= m) return 2.0 * inputs[m - 1].center() - inputs[m - 2].center();
    return inputs[i].center();
  };
  for (int k = 0; k < n; ++k) {
    const double s = n == 1 ? 0.0 : static_cast<double>(k) * (m - 1) / (n - 1);
    const int seg = std::min(static_cast<int>(std::floor(s)), m - 2);
    const double u = s - seg;
    CameraPose pose;
    pose.translation =
        catmull_rom(center(seg - 1), center(seg), center(seg + 1), center(seg + 2), u);
    const Eigen::Quaterniond qa(inputs[seg].rotation);
    const Eigen::Quaterniond qb(inputs[seg + 1].rotation);
    pose.rotation = qa.slerp(u, qb).normalized().toRotationMatrix();
    path.poses.push_back(pose);
  }
  return path;
}

}  // namespace

CameraPath sample_camera_path(PathKind kind, std::span<const CameraPose> inputs,
                              int num_views, const PathOptions& options) {
  if (num_views < 1) throw std::invalid_argument("sample_camera_path: num_views < 1");
  if (inputs.empty()) throw std::invalid_argument("sample_camera_path: no input cameras");
  if (!(options.up.norm() > 0.0)) throw std::invalid_argument("sample_camera_path: zero up");
  switch (kind) {
    case PathKind::kCircular:
      return circular_path(inputs, num_views, options);
    case PathKind::kForwardFacing:
      return forward_facing_path(inputs, num_views, options);
    case PathKind::kSpline:
      return spline_path(inputs, num_views);
  }
  throw std::invalid_argument("sample_camera_path: unknown kind");
}

}  // namespace splatgen
