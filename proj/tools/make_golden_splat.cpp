// Regenerates tests/fixtures/golden.splat and golden.json.
//
// The JSON lists every source Gaussian and the values a conforming decoder
// must produce, so other .splat readers can be checked against the same file.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "splatgen/assets.hpp"

using namespace splatgen;

namespace {

nlohmann::json to_json(const Gaussian3D& g) {
  return {{"mean", {g.mean.x(), g.mean.y(), g.mean.z()}},
          {"scale", {g.scale.x(), g.scale.y(), g.scale.z()}},
          {"rotation_wxyz", {g.rotation.w(), g.rotation.x(), g.rotation.y(), g.rotation.z()}},
          {"opacity", g.opacity},
          {"color", {g.color.x(), g.color.y(), g.color.z()}}};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: make_golden_splat <fixture-dir>\n");
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n;

  // 300 Gaussians: one full chunk and one partial chunk.
  GaussianScene scene;
  for (int i = 0; i < 300; ++i) {
    Gaussian3D g;
    g.mean = Vec3(4.0 * u(rng) - 2.0, 2.0 * u(rng) - 1.0, 3.0 * u(rng) + 1.0);
    g.scale = Vec3(std::exp(-4.0 + 3.0 * u(rng)), std::exp(-4.0 + 3.0 * u(rng)),
                   std::exp(-4.0 + 3.0 * u(rng)));
    g.rotation = Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)).normalized();
    g.opacity = u(rng);
    g.color = Vec3(u(rng), u(rng), u(rng));
    scene.push_back(g);
  }

  const auto bytes = encode_splat(scene);
  write_file(dir / "golden.splat", bytes);
  SplatFileInfo info;
  const auto decoded = decode_splat(bytes, &info);

  nlohmann::json j;
  j["format"] = "splat";
  j["version"] = info.version;
  j["count"] = info.count;
  j["chunk_counts"] = info.chunk_counts;
  j["byte_size"] = bytes.size();
  j["decoded_tolerance"] = 1e-6;
  for (std::size_t i = 0; i < scene.size(); ++i) {
    j["source"].push_back(to_json(scene.gaussians[i]));
    j["decoded"].push_back(to_json(decoded.gaussians[i]));
  }
  std::ofstream(dir / "golden.json") << j.dump(1) << "\n";
  return 0;
}
