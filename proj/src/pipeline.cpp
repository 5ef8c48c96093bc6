#include "splatgen/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <stdexcept>

#include "splatgen/assets.hpp"
#include "splatgen/image_io.hpp"
#include "splatgen/metrics.hpp"
#include "splatgen/renderer.hpp"
#include "splatgen/scene_synth.hpp"

namespace splatgen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string numbered(const std::string& stem, int i, const std::string& suffix) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", i);
  return stem + "_" + buf + suffix;
}

Image depth_image(const DepthMap& d) {
  Image img(d.width(), d.height(), 1);
  for (int v = 0; v < d.height(); ++v) {
    for (int u = 0; u < d.width(); ++u) {
      img.at(u, v, 0) = d.valid(u, v) ? d.depth(u, v) : 0.0;
    }
  }
  return img;
}

bool role_selected(const std::string& wanted, const std::string& role) {
  if (wanted != "source" && wanted != "heldout" && wanted != "all") {
    throw std::invalid_argument("unknown view role '" + wanted +
                                "' (expected source, heldout or all)");
  }
  return wanted == "all" || wanted == role;
}

fs::path resolve_asset(const fs::path& manifest_path, const SceneManifest& m,
                       const fs::path& override_path) {
  if (!override_path.empty()) return override_path;
  if (m.splat_asset.empty()) {
    throw std::runtime_error("no asset given and none recorded in " + manifest_path.string());
  }
  return manifest_path.parent_path() / m.splat_asset;
}

RenderOptions render_options(const SceneManifest& m, unsigned threads) {
  RenderOptions opts;
  opts.background = m.background;
  opts.threads = threads;
  return opts;
}

}  // namespace

fs::path cmd_synthesize(const SynthesizeConfig& config) {
  if (config.resolution < 8) throw std::invalid_argument("resolution must be >= 8");
  if (config.views < 1) throw std::invalid_argument("views must be >= 1");
  if (config.out.empty()) throw std::invalid_argument("synthesize: output directory required");
  fs::create_directories(config.out);

  const SyntheticScene scene = generate_scene(config.seed, config.complexity);
  const int total = config.heldout ? 2 * config.views - 1 : config.views;
  const double arc = total > 1 ? config.orbit_arc_deg : 0.0;
  const auto poses = orbit_poses(total, config.orbit_radius, config.orbit_height, arc);
  const auto intr =
      CameraIntrinsics::from_hfov(config.resolution, config.resolution, kDefaultHfovDeg);

  std::vector<Image> images;
  std::vector<Pointmap> pointmaps;
  for (const auto& pose : poses) {
    TracedView traced = raytrace_synthetic(scene, intr, pose);
    pointmaps.push_back(unproject_depth(intr, pose, traced.depth));
    images.push_back(std::move(traced.image.rgb));
  }
  const NormalizedScene norm = normalize_scene(poses, pointmaps);

  SceneManifest m;
  m.seed = config.seed;
  m.background = scene.background;
  m.normalization = norm.normalization;
  // World +y expressed in the frame of the first camera.
  m.up = norm.normalization.reference.rotation.transpose() * Vec3::UnitY();
  m.scene = scene;
  for (int i = 0; i < total; ++i) {
    const auto k = static_cast<std::size_t>(i);
    ViewRecord v;
    v.camera = {intr, norm.poses[k]};
    v.role = (config.heldout && i % 2 == 1) ? "heldout" : "source";
    v.image = numbered("view", i, ".png");
    v.depth = numbered("view", i, "_depth.pfm");
    v.pointmap = numbered("view", i, ".pointmap");
    write_png(config.out / v.image, images[k]);
    write_pfm(config.out / v.depth,
              depth_image(depth_from_pointmap(norm.pointmaps[k], norm.poses[k])));
    write_pointmap(config.out / v.pointmap, norm.pointmaps[k]);
    m.views.push_back(std::move(v));
  }
  const fs::path manifest_path = config.out / "manifest.json";
  write_manifest(manifest_path, m);
  return manifest_path;
}

ReconstructResult cmd_reconstruct(const ReconstructConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const SceneManifest m = read_manifest(config.manifest);
  const fs::path dir = config.manifest.parent_path();

  std::vector<Image> images;
  std::vector<Pointmap> pointmaps;
  std::vector<Camera> cameras;
  for (const auto& v : m.views) {
    if (v.role != "source") continue;
    if (v.image.empty() || v.pointmap.empty()) {
      throw std::runtime_error("reconstruct: source view without image or pointmap");
    }
    images.push_back(read_png(dir / v.image));
    const Pointmap pm = read_pointmap(dir / v.pointmap);
    pointmaps.push_back(calibrate_pointmap(pm, v.camera.intrinsics, v.camera.pose));
    cameras.push_back(v.camera);
  }
  if (cameras.empty()) throw std::runtime_error("reconstruct: manifest has no source views");

  const auto splatter = analytic_gaussian_head(images, pointmaps, cameras, config.head);
  const GaussianScene merged = merge_splatter_images(splatter);
  const GaussianScene culled = cull_transparent(merged, config.opacity_threshold);
  if (culled.empty()) throw std::runtime_error("reconstruct: no Gaussians left after culling");

  ReconstructResult r;
  r.asset = config.out.empty() ? dir / "scene.splat" : config.out;
  export_splat(culled, r.asset);
  r.gaussians_before_cull = merged.size();
  r.gaussians = culled.size();

  SceneManifest updated = m;
  std::error_code ec;
  const fs::path rel = fs::relative(r.asset, dir, ec);
  updated.splat_asset = ec ? fs::absolute(r.asset).string() : rel.generic_string();
  write_manifest(config.manifest, updated);
  r.seconds = seconds_since(start);
  std::cerr << "reconstruct: " << r.gaussians << " gaussians (" << r.gaussians_before_cull
            << " before culling) from " << cameras.size() << " views in " << r.seconds
            << " s\n";
  return r;
}

int cmd_render(const RenderConfig& config) {
  const SceneManifest m = read_manifest(config.manifest);
  const GaussianScene scene = import_splat(resolve_asset(config.manifest, m, config.asset));
  if (config.out.empty()) throw std::invalid_argument("render: output directory required");
  fs::create_directories(config.out);

  std::vector<Camera> cameras;
  if (!config.path.empty()) {
    std::vector<CameraPose> inputs;
    CameraIntrinsics intr;
    for (const auto& v : m.views) {
      if (v.role != "source") continue;
      if (inputs.empty()) intr = v.camera.intrinsics;
      inputs.push_back(v.camera.pose);
    }
    if (inputs.empty()) throw std::runtime_error("render: no source cameras for the path");
    PathOptions opts;
    opts.up = m.up;
    const CameraPath path =
        sample_camera_path(parse_path_kind(config.path), inputs, config.path_views, opts);
    for (const auto& pose : path.poses) cameras.push_back({intr, pose});
  } else {
    for (const auto& v : m.views) {
      if (role_selected(config.role, v.role)) cameras.push_back(v.camera);
    }
  }

  const RenderOptions opts = render_options(m, config.threads);
  for (std::size_t i = 0; i < cameras.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    const RenderedImage img = render_tiled(scene, cameras[i].intrinsics, cameras[i].pose,
                                           config.tile_size, opts);
    const int idx = static_cast<int>(i);
    write_png(config.out / numbered("render", idx, ".png"), img.rgb);
    write_pfm(config.out / numbered("render", idx, "_depth.pfm"), img.depth);
    std::cerr << "render: view " << idx << " in " << seconds_since(start) << " s";
    if (img.skipped_degenerate > 0) {
      std::cerr << " (" << img.skipped_degenerate << " degenerate gaussians skipped)";
    }
    std::cerr << "\n";
  }
  return static_cast<int>(cameras.size());
}

std::vector<EvalRecord> cmd_eval(const EvalConfig& config) {
  const SceneManifest m = read_manifest(config.manifest);
  const fs::path dir = config.manifest.parent_path();
  const GaussianScene scene = import_splat(resolve_asset(config.manifest, m, config.asset));
  const RenderOptions opts = render_options(m, config.threads);

  std::vector<EvalRecord> records;
  for (std::size_t i = 0; i < m.views.size(); ++i) {
    const ViewRecord& v = m.views[i];
    if (!role_selected(config.role, v.role)) continue;
    if (v.image.empty() || v.pointmap.empty()) {
      throw std::runtime_error("eval: view " + std::to_string(i) + " lacks ground truth");
    }
    const Image gt = read_png(dir / v.image);
    const Pointmap gt_points = read_pointmap(dir / v.pointmap);

    const auto start = std::chrono::steady_clock::now();
    const RenderedImage r = render_tiled(scene, v.camera.intrinsics, v.camera.pose,
                                         config.tile_size, opts);
    EvalRecord rec;
    rec.render_seconds = seconds_since(start);
    rec.view = static_cast<int>(i);
    rec.role = v.role;
    rec.psnr = metric_psnr(r.rgb, gt);
    rec.ssim = metric_ssim(r.rgb, gt);
    rec.baseline_psnr = metric_psnr(constant_mean_image(gt), gt);

    const DepthMap gt_depth = depth_from_pointmap(gt_points, v.camera.pose);
    DepthMap pred(gt_depth.width(), gt_depth.height());
    for (int y = 0; y < pred.height(); ++y) {
      for (int x = 0; x < pred.width(); ++x) {
        const double z = r.depth.at(x, y, 0);
        if (r.alpha.at(x, y, 0) >= 0.5 && z > 0.0) {
          pred.depth(x, y) = z;
          pred.valid(x, y) = 1;
        }
      }
    }
    rec.absrel = metric_absrel(pred, gt_depth);
    rec.delta = metric_delta(pred, gt_depth);
    if (v.role == "source") {
      const Pointmap calibrated =
          calibrate_pointmap(gt_points, v.camera.intrinsics, v.camera.pose);
      rec.duv = metric_duv(calibrated, v.camera.intrinsics, v.camera.pose);
    }
    records.push_back(rec);
  }
  if (records.empty()) throw std::runtime_error("eval: no views with role " + config.role);
  return records;
}

void write_eval_jsonl(std::ostream& out, const std::vector<EvalRecord>& records) {
  EvalRecord mean;
  int duv_count = 0;
  double duv_sum = 0.0;
  for (const auto& r : records) {
    json j = {{"schema", kEvalSchema},     {"view", r.view},
              {"role", r.role},            {"psnr", r.psnr},
              {"ssim", r.ssim},            {"baseline_psnr", r.baseline_psnr},
              {"psnr_gain", r.psnr - r.baseline_psnr},
              {"absrel", r.absrel},        {"delta_1.01", r.delta},
              {"duv", r.duv ? json(*r.duv) : json(nullptr)},
              {"render_seconds", r.render_seconds}};
    out << j.dump() << "\n";
    mean.psnr += r.psnr;
    mean.ssim += r.ssim;
    mean.baseline_psnr += r.baseline_psnr;
    mean.absrel += r.absrel;
    mean.delta += r.delta;
    mean.render_seconds += r.render_seconds;
    if (r.duv) {
      duv_sum += *r.duv;
      ++duv_count;
    }
  }
  if (records.empty()) return;
  const double n = static_cast<double>(records.size());
  std::string role = records.front().role;
  for (const auto& r : records) {
    if (r.role != role) role = "all";
  }
  json summary = {{"schema", kEvalSchema},
                  {"view", "mean"},
                  {"role", role},
                  {"views", records.size()},
                  {"psnr", mean.psnr / n},
                  {"ssim", mean.ssim / n},
                  {"baseline_psnr", mean.baseline_psnr / n},
                  {"psnr_gain", (mean.psnr - mean.baseline_psnr) / n},
                  {"absrel", mean.absrel / n},
                  {"delta_1.01", mean.delta / n},
                  {"duv", duv_count > 0 ? json(duv_sum / duv_count) : json(nullptr)},
                  {"render_seconds", mean.render_seconds}};
  out << summary.dump() << "\n";
}

SamplerDemoResult cmd_sampler_demo(const SamplerDemoConfig& config) {
  if (config.samples < 1) throw std::invalid_argument("sampler: samples must be >= 1");
  NoiseSchedule schedule = make_schedule(config.schedule, config.train_steps);
  if (config.zero_terminal_snr) schedule = rescale_zero_terminal_snr(schedule);

  SamplerDemoResult res;
  std::unique_ptr<Denoiser> oracle;
  std::vector<MixtureComponent> mixture;
  std::vector<double> target;
  if (config.oracle == "delta") {
    target = {0.5, -0.25, 0.75};
    oracle = std::make_unique<DeltaDenoiser>(target);
    res.data_mean = target;
    res.data_var.assign(target.size(), 0.0);
  } else if (config.oracle == "gaussian" || config.oracle == "mixture") {
    if (config.oracle == "gaussian") {
      Eigen::Matrix2d cov;
      cov << 0.5, 0.1, 0.1, 0.2;
      mixture.push_back({1.0, Eigen::Vector2d(1.0, -0.5), cov});
    } else {
      mixture.push_back({0.3, Eigen::Vector2d(-1.0, 0.5), 0.1 * Eigen::Matrix2d::Identity()});
      mixture.push_back({0.7, Eigen::Vector2d(1.0, -0.5), 0.2 * Eigen::Matrix2d::Identity()});
    }
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    Eigen::Vector2d second = Eigen::Vector2d::Zero();
    for (const auto& c : mixture) {
      mean += c.weight * c.mean;
      second += c.weight * (c.covariance.diagonal() + c.mean.cwiseAbs2());
    }
    const Eigen::Vector2d var = second - mean.cwiseAbs2();
    res.data_mean = {mean.x(), mean.y()};
    res.data_var = {var.x(), var.y()};
    oracle = std::make_unique<GaussianMixtureDenoiser>(mixture);
  } else {
    throw std::invalid_argument("unknown oracle '" + config.oracle +
                                "' (expected delta, gaussian or mixture)");
  }

  const int dim = static_cast<int>(res.data_mean.size());
  std::vector<std::vector<double>> trajectory;
  const std::vector<double> x =
      sample(*oracle, schedule, config.steps, config.eta, config.seed,
             {config.samples, dim}, config.out.empty() ? nullptr : &trajectory);

  res.sample_mean.assign(static_cast<std::size_t>(dim), 0.0);
  res.sample_var.assign(static_cast<std::size_t>(dim), 0.0);
  const double n = config.samples;
  for (int r = 0; r < config.samples; ++r) {
    for (int d = 0; d < dim; ++d) res.sample_mean[d] += x[r * dim + d] / n;
  }
  for (int r = 0; r < config.samples; ++r) {
    for (int d = 0; d < dim; ++d) {
      const double e = x[r * dim + d] - res.sample_mean[d];
      res.sample_var[d] += e * e / n;
    }
  }
  for (int d = 0; d < dim; ++d) {
    if (config.oracle == "delta") {
      for (int r = 0; r < config.samples; ++r) {
        res.terminal_error =
            std::max(res.terminal_error, std::abs(x[r * dim + d] - target[d]));
      }
    } else {
      const double em = std::abs(res.sample_mean[d] - res.data_mean[d]) /
                        std::abs(res.data_mean[d]);
      const double ev = std::abs(res.sample_var[d] - res.data_var[d]) / res.data_var[d];
      res.terminal_error = std::max({res.terminal_error, em, ev});
    }
  }

  if (!config.out.empty()) {
    fs::create_directories(config.out);
    std::vector<float> flat;
    flat.reserve(trajectory.size() * x.size());
    for (const auto& state : trajectory) {
      for (double value : state) flat.push_back(static_cast<float>(value));
    }
    std::vector<std::uint8_t> bytes(flat.size() * sizeof(float));
    for (std::size_t i = 0; i < flat.size(); ++i) {
      const auto bits = std::bit_cast<std::uint32_t>(flat[i]);
      for (int b = 0; b < 4; ++b) bytes[4 * i + b] = static_cast<std::uint8_t>(bits >> (8 * b));
    }
    write_file(config.out / "trajectory.f32", bytes);

    json meta = {{"schema", kSamplerSchema},
                 {"oracle", config.oracle},
                 {"schedule", std::string(to_string(config.schedule))},
                 {"train_steps", config.train_steps},
                 {"zero_terminal_snr", config.zero_terminal_snr},
                 {"steps", config.steps},
                 {"eta", config.eta},
                 {"seed", config.seed},
                 {"states", trajectory.size()},
                 {"samples", config.samples},
                 {"dim", dim},
                 {"timesteps", ddim_timesteps(schedule.steps(), config.steps)},
                 {"terminal_error", res.terminal_error},
                 {"sample_mean", res.sample_mean},
                 {"sample_var", res.sample_var},
                 {"data_mean", res.data_mean},
                 {"data_var", res.data_var}};
    std::ofstream out(config.out / "sampler.json");
    out << meta.dump(2) << "\n";
  }
  return res;
}

}  // namespace splatgen
