#include <doctest.h>

#include <cmath>

#include "splatgen/geometry.hpp"
#include "support.hpp"

using namespace splatgen;
using namespace splatgen::testing;

TEST_CASE("pixel rays pass through pixel centers") {
  const auto k = CameraIntrinsics::from_hfov(4, 2, 90.0);
  CHECK(k.fx == doctest::Approx(2.0));
  CHECK(k.cx == 2.0);
  CHECK(k.cy == 1.0);
  // Pixel (1, 0) has its center at (1.5, 0.5), half a pixel left and up of
  // the principal point.
  const Vec3 r = k.pixel_ray(1, 0);
  CHECK(r.x() == doctest::Approx(-0.25));
  CHECK(r.y() == doctest::Approx(-0.25));
  CHECK(r.z() == 1.0);
}

TEST_CASE("intrinsics validation") {
  CameraIntrinsics k{0.0, 1.0, 0.5, 0.5, 1, 1};
  CHECK_THROWS_AS(k.validate(), std::invalid_argument);
  k = {1.0, 1.0, 0.5, 0.5, 0, 1};
  CHECK_THROWS_AS(k.validate(), std::invalid_argument);
}

TEST_CASE("look_at points the optical axis at the target") {
  const Vec3 eye(1.0, 2.0, -3.0);
  const Vec3 target(0.5, 0.0, 1.0);
  const auto pose = CameraPose::look_at(eye, target, Vec3::UnitY());
  pose.validate();
  const Vec3 t = pose.to_camera(target);
  CHECK(std::abs(t.x()) < 1e-12);
  CHECK(std::abs(t.y()) < 1e-12);
  CHECK(t.z() == doctest::Approx((target - eye).norm()));
  // World up appears towards negative image y (image y points down).
  CHECK(pose.to_camera(eye + Vec3::UnitY()).y() < 0.0);
  CHECK_THROWS_AS(CameraPose::look_at(eye, eye, Vec3::UnitY()), std::invalid_argument);
  CHECK_THROWS_AS(CameraPose::look_at(Vec3::Zero(), Vec3::UnitY(), Vec3::UnitY()),
                  std::invalid_argument);
}

TEST_CASE("pose inverse and composition are consistent") {
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const auto a = random_pose(rng);
    const auto b = random_pose(rng);
    const Vec3 p = random_vec(rng, -5.0, 5.0);
    CHECK((a * a.inverse()).is_identity(1e-12));
    CHECK(((a * b).to_world(p) - a.to_world(b.to_world(p))).norm() < 1e-12);
    CHECK((a.to_camera(a.to_world(p)) - p).norm() < 1e-12);
  }
  CameraPose bad;
  bad.rotation = Mat3::Identity() * 1.01;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.rotation = Mat3::Identity();
  bad.rotation(2, 2) = -1.0;  // reflection
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

namespace {

struct RandomScene {
  CameraIntrinsics intrinsics;
  std::vector<CameraPose> poses;
  std::vector<Pointmap> pointmaps;
};

RandomScene random_scene(Rng& rng, int views) {
  RandomScene s;
  s.intrinsics = random_intrinsics(rng, 12, 9);
  for (int i = 0; i < views; ++i) {
    s.poses.push_back(random_pose(rng, 3.0));
    s.pointmaps.push_back(random_pointmap(rng, s.intrinsics, s.poses.back()));
  }
  return s;
}

double max_point_error(const Pointmap& a, const Pointmap& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    REQUIRE(a.valid[i] == b.valid[i]);
    if (a.valid[i]) e = std::max(e, (a.points[i] - b.points[i]).norm());
  }
  return e;
}

}  // namespace

TEST_CASE("normalization: identity first pose, unit mean depth, exact inverse") {
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_scene(rng, 3);
    const auto norm = normalize_scene(s.poses, s.pointmaps);
    CHECK(norm.poses[0].is_identity(0.0));
    CHECK(std::abs(mean_depth(norm.pointmaps[0], norm.poses[0]) - 1.0) <= 1e-9);
    // Independent oracle for the scale: 1 / mean camera-frame z of view 0.
    double z_sum = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < s.pointmaps[0].points.size(); ++i) {
      if (!s.pointmaps[0].valid[i]) continue;
      z_sum += s.poses[0].to_camera(s.pointmaps[0].points[i]).z();
      ++n;
    }
    CHECK(norm.normalization.scale == doctest::Approx(n / z_sum).epsilon(1e-12));

    const auto back = denormalize_scene(norm);
    for (std::size_t v = 0; v < s.poses.size(); ++v) {
      CHECK((back.poses[v].rotation - s.poses[v].rotation).cwiseAbs().maxCoeff() <= 1e-9);
      CHECK((back.poses[v].translation - s.poses[v].translation).norm() <= 1e-9);
      CHECK(max_point_error(back.pointmaps[v], s.pointmaps[v]) <= 1e-9);
    }
  }
}

TEST_CASE("normalization is invariant to a global similarity transform") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = random_scene(rng, 3);
    const CameraPose g = random_pose(rng, 10.0);
    const double scale = uniform(rng, 0.1, 10.0);
    std::vector<CameraPose> poses;
    std::vector<Pointmap> pms;
    for (std::size_t v = 0; v < s.poses.size(); ++v) {
      poses.push_back((g * s.poses[v]).scaled(scale));
      Pointmap pm = s.pointmaps[v];
      for (std::size_t i = 0; i < pm.points.size(); ++i) {
        if (pm.valid[i]) pm.points[i] = g.to_world(pm.points[i]) * scale;
      }
      pms.push_back(pm);
    }
    const auto a = normalize_scene(s.poses, s.pointmaps);
    const auto b = normalize_scene(poses, pms);
    for (std::size_t v = 0; v < poses.size(); ++v) {
      CHECK((a.poses[v].rotation - b.poses[v].rotation).cwiseAbs().maxCoeff() < 1e-9);
      CHECK((a.poses[v].translation - b.poses[v].translation).norm() < 1e-9);
      CHECK(max_point_error(a.pointmaps[v], b.pointmaps[v]) < 1e-9);
    }
  }
}

TEST_CASE("normalization errors") {
  std::vector<CameraPose> poses{CameraPose::identity()};
  std::vector<Pointmap> none;
  CHECK_THROWS_AS(normalize_scene(poses, none), std::invalid_argument);
  std::vector<Pointmap> empty{Pointmap(2, 2)};
  CHECK_THROWS_AS(normalize_scene(poses, empty), std::invalid_argument);
  Pointmap behind(1, 1);
  behind.points(0, 0) = Vec3(0.0, 0.0, -1.0);
  behind.valid(0, 0) = 1;
  std::vector<Pointmap> back{behind};
  CHECK_THROWS_AS(normalize_scene(poses, back), std::invalid_argument);
}

TEST_CASE("max-xyz scaling puts the largest coordinate at 1") {
  Rng rng(3);
  const auto s = random_scene(rng, 2);
  const auto r = scale_max_xyz(s.pointmaps);
  double max_abs = 0.0;
  for (const auto& pm : r.pointmaps) {
    for (std::size_t i = 0; i < pm.points.size(); ++i) {
      if (pm.valid[i]) max_abs = std::max(max_abs, pm.points[i].cwiseAbs().maxCoeff());
    }
  }
  CHECK(max_abs == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("sigmoid contraction round-trips") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(-800.0) >= 0.0);
  CHECK(sigmoid(800.0) <= 1.0);
  CHECK_THROWS_AS(logit(0.0), std::domain_error);
  CHECK_THROWS_AS(logit(1.0), std::domain_error);
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    const double x = uniform(rng, -10.0, 10.0);
    CHECK(logit(sigmoid(x)) == doctest::Approx(x).epsilon(1e-9));
  }
  const auto s = random_scene(rng, 1);
  const auto c = contract(s.pointmaps[0]);
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    if (!c.valid[i]) continue;
    CHECK(c.points[i].minCoeff() > 0.0);
    CHECK(c.points[i].maxCoeff() < 1.0);
  }
  CHECK(max_point_error(uncontract(c), s.pointmaps[0]) < 1e-9);
}

TEST_CASE("raymap holds the camera center and unit pixel directions") {
  Rng rng(4);
  const auto k = random_intrinsics(rng, 7, 5);
  const auto pose = random_pose(rng);
  const auto rays = compute_raymap(k, pose);
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      CHECK((rays.origins(u, v) - pose.center()).norm() == 0.0);
      CHECK(rays.directions(u, v).norm() == doctest::Approx(1.0));
      const auto proj = project_point(k, pose, pose.center() + 3.0 * rays.directions(u, v));
      REQUIRE(proj.has_value());
      CHECK(proj->u == doctest::Approx(u + 0.5));
      CHECK(proj->v == doctest::Approx(v + 0.5));
    }
  }
}

TEST_CASE("unprojected depth reprojects onto pixel centers") {
  Rng rng(6);
  const auto k = random_intrinsics(rng, 9, 7);
  const auto pose = random_pose(rng);
  DepthMap d(k.width, k.height);
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      d.depth(u, v) = uniform(rng, 0.1, 10.0);
      d.valid(u, v) = (u + v) % 3 != 0;
    }
  }
  const auto pm = unproject_depth(k, pose, d);
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      REQUIRE(pm.valid(u, v) == d.valid(u, v));
      if (!pm.valid(u, v)) continue;
      const auto p = project_point(k, pose, pm.points(u, v));
      REQUIRE(p.has_value());
      CHECK(std::abs(p->u - (u + 0.5)) < 1e-9);
      CHECK(std::abs(p->v - (v + 0.5)) < 1e-9);
      CHECK(p->z == doctest::Approx(d.depth(u, v)).epsilon(1e-12));
    }
  }
  d.depth(1, 1) = -1.0;
  d.valid(1, 1) = 1;
  CHECK_THROWS_AS(unproject_depth(k, pose, d), std::invalid_argument);
  CHECK_FALSE(project_point(k, CameraPose::identity(), Vec3(0.0, 0.0, -1.0)).has_value());
}

TEST_CASE("reconstruction weight fixtures") {
  // d = distance from the point to (0, 0, 1) in camera coordinates.
  CHECK(rec_weight(Vec3(0.0, 0.0, 1.0)) == 1.0);                 // d = 0
  CHECK(rec_weight(Vec3(0.0, 0.5, 1.0)) == 1.0);                 // d < 1 clamps
  CHECK(rec_weight(Vec3(1.0, 0.0, 1.0)) == 1.0);                 // d = 1
  CHECK(rec_weight(Vec3(0.0, 0.0, 3.0)) == doctest::Approx(0.75));  // d = 2
  CHECK(rec_weight(Vec3(0.0, 0.0, 4.0)) == doctest::Approx(5.0 / 9.0));  // d = 3

  // Non-increasing in d beyond 1.
  double prev = 1.0;
  for (double d = 1.0; d < 50.0; d += 0.25) {
    const double w = rec_weight(Vec3(0.0, 0.0, 1.0 + d));
    CHECK(w <= prev + 1e-15);
    CHECK(w > 0.0);
    prev = w;
  }

  Pointmap gt(2, 1);
  gt.points(0, 0) = Vec3(0.0, 0.0, 4.0);
  gt.valid(0, 0) = 1;
  gt.points(1, 0) = Vec3(0.0, 0.0, 4.0);
  const auto w = rec_weights(gt, CameraPose::identity());
  CHECK(w(0, 0) == doctest::Approx(5.0 / 9.0));
  CHECK(w(1, 0) == 0.0);
}
