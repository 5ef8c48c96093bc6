// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>

#include "splatgen/assets.hpp"
#include "splatgen/diffusion.hpp"
#include "splatgen/gradcheck.hpp"
#include "splatgen/losses.hpp"
#include "splatgen/metrics.hpp"
#include "splatgen/pipeline.hpp"
#include "splatgen/renderer.hpp"
#include "splatgen/toy_ae.hpp"
#include "support.hpp"

using namespace splatgen;
using namespace splatgen::testing;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects failed sub-checks of one criterion.
class Outcome {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    all_ok_ = all_ok_ && ok;
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }
  bool ok() const { return all_ok_; }
  std::string detail() const {
    std::string d = notes_;
    for (const auto& f : failures_) d += (d.empty() ? "" : "; ") + ("failed: " + f);
    return d;
  }

 private:
  bool all_ok_ = true;
  std::vector<std::string> failures_;
  std::string notes_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// --- criteria -------------------------------------------------------------------

void rasterizer(Outcome& out) {
  const auto t0 = Clock::now();
  const auto k = CameraIntrinsics::from_hfov(64, 64, 60.0);
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const auto scene = random_gaussian_scene(rng, 100);
    RenderOptions opt;
    opt.background = random_vec(rng, 0.0, 1.0);
    const auto ref = render_reference(scene, k, CameraPose::identity(), opt);
    const auto tiled = render_tiled(scene, k, CameraPose::identity(), 16, opt);
    for (std::size_t i = 0; i < ref.rgb.data().size(); ++i) {
      worst = std::max(worst, std::abs(ref.rgb.data()[i] - tiled.rgb.data()[i]));
    }
  }
  const double secs = seconds_since(t0);
  out.note("max |tiled - reference| = " + fmt("%.3g", worst) + ", " + fmt("%.2f s", secs));
  out.require(worst <= 1e-4, "max difference <= 1e-4");
  out.require(secs <= 10.0, "runtime <= 10 s");
}

void calibration(Outcome& out) {
  Rng rng(101);
  double worst_duv = 0.0, worst_z = 0.0, worst_idem = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto k = random_intrinsics(rng, 32, 24);
    const auto pose = random_pose(rng, 3.0);
    const auto pm = random_pointmap(rng, k, pose, 0.3, 6.0, 0.85, 0.3);
    const auto cal = calibrate_pointmap(pm, k, pose);
    worst_duv = std::max(worst_duv, metric_duv(cal, k, pose));
    for (std::size_t i = 0; i < pm.points.size(); ++i) {
      out.require(cal.valid[i] == pm.valid[i], "validity preserved");
      if (!pm.valid[i]) continue;
      const double z0 = pose.to_camera(pm.points[i]).z();
      const double z1 = pose.to_camera(cal.points[i]).z();
      worst_z = std::max(worst_z, std::abs(z1 - z0) / z0);
    }
    const auto twice = calibrate_pointmap(cal, k, pose);
    for (std::size_t i = 0; i < cal.points.size(); ++i) {
      if (cal.valid[i]) worst_idem = std::max(worst_idem, (twice.points[i] - cal.points[i]).norm());
    }
  }
  out.note("duv " + fmt("%.3g px", worst_duv) + ", z rel " + fmt("%.3g", worst_z) +
           ", idempotence " + fmt("%.3g", worst_idem));
  out.require(worst_duv <= 1e-6, "duv <= 1e-6 px");
  // A rigid transform round trip in floating point is exact up to rounding.
  out.require(worst_z <= 1e-12, "camera-frame z preserved (1e-12 relative)");
  out.require(worst_idem <= 1e-12, "calibration idempotent");
}

void normalization(Outcome& out) {
  Rng rng(202);
  double worst_depth = 0.0, worst_round = 0.0;
  bool identity = true;
  for (int trial = 0; trial < 20; ++trial) {
    const auto k = random_intrinsics(rng, 16, 12);
    std::vector<CameraPose> poses;
    std::vector<Pointmap> pms;
    for (int v = 0; v < 3; ++v) {
      poses.push_back(random_pose(rng, 5.0));
      pms.push_back(random_pointmap(rng, k, poses.back(), 0.5, 8.0));
    }
    const auto norm = scale_mean_depth(relativize_scene(poses, pms));
    identity = identity && norm.poses[0].is_identity(0.0);
    worst_depth = std::max(worst_depth, std::abs(mean_depth(norm.pointmaps[0], norm.poses[0]) - 1.0));
    const auto back = denormalize_scene(norm);
    for (std::size_t v = 0; v < poses.size(); ++v) {
      worst_round = std::max(worst_round, (back.poses[v].rotation - poses[v].rotation).cwiseAbs().maxCoeff());
      worst_round = std::max(worst_round, (back.poses[v].translation - poses[v].translation).norm());
      for (std::size_t i = 0; i < pms[v].points.size(); ++i) {
        if (pms[v].valid[i]) {
          worst_round = std::max(worst_round, (back.pointmaps[v].points[i] - pms[v].points[i]).norm());
        }
      }
    }
  }
  out.note("|mean depth - 1| " + fmt("%.3g", worst_depth) + ", round trip " + fmt("%.3g", worst_round));
  out.require(identity, "first pose is identity");
  out.require(worst_depth <= 1e-9, "mean first-view depth = 1 +- 1e-9");
  out.require(worst_round <= 1e-9, "de-normalization round trip <= 1e-9");
}

void loss_suite(Outcome& out) {
  out.require(loss_kl({{0.0}, {1.0}}) == 0.0, "KL(0, 1) = 0");
  out.require(std::abs(loss_kl({{1.0}, {1.0}}) - 0.5) <= 1e-15, "KL(1, 1) = 0.5");
  out.require(std::abs(rec_weight(Vec3(0.0, 0.0, 4.0)) - 5.0 / 9.0) <= 1e-15,
              "rec_weight(d = 3) = 5/9");

  Rng rng(303);
  double worst[4] = {0, 0, 0, 0};
  const LossWeights lambdas{0.5, 0.3};
  for (int trial = 0; trial < 100; ++trial) {
    const int w = 3 + trial % 3, h = 2 + trial % 4;
    const auto gt = random_geometry_maps(rng, w, h);
    const auto weights = random_weights(rng, gt.pointmap);
    const auto start = pack_geometry(random_geometry_maps(rng, w, h));
    const std::size_t n_geo = start.size();
    GeometryMaps work = gt;

    GradientFunction rec = [&](std::span<const double> x, std::span<double> g) {
      unpack_geometry(x, work);
      GeometryGrad gg;
      const double f = loss_rec(work, gt, weights, g.empty() ? nullptr : &gg);
      if (!g.empty()) pack_geometry_grad(gg, g);
      return f;
    };
    GradientFunction grad = [&](std::span<const double> x, std::span<double> g) {
      unpack_geometry(x, work);
      Grid<Vec3> gp;
      const double f = loss_grad(work.pointmap, gt.pointmap, g.empty() ? nullptr : &gp);
      if (!g.empty()) {
        std::fill(g.begin(), g.end(), 0.0);
        for (std::size_t i = 0; i < gp.size(); ++i) {
          for (int c = 0; c < 3; ++c) g[9 * i + c] = gp[i][c];
        }
      }
      return f;
    };
    const int latent = 1 + trial % 5;
    std::vector<double> lat;
    for (int k = 0; k < latent; ++k) lat.push_back(uniform(rng, -2.0, 2.0));
    for (int k = 0; k < latent; ++k) lat.push_back(std::exp(uniform(rng, -2.0, 2.0)));
    GradientFunction kl = [&](std::span<const double> x, std::span<double> g) {
      LatentStats s{{x.begin(), x.begin() + latent}, {x.begin() + latent, x.end()}};
      LatentGrad lg;
      const double f = loss_kl(s, g.empty() ? nullptr : &lg);
      if (!g.empty()) {
        std::copy(lg.mu.begin(), lg.mu.end(), g.begin());
        std::copy(lg.var.begin(), lg.var.end(), g.begin() + latent);
      }
      return f;
    };
    std::vector<double> full = start;
    full.insert(full.end(), lat.begin(), lat.end());
    GradientFunction total = [&](std::span<const double> x, std::span<double> g) {
      unpack_geometry(x.first(n_geo), work);
      LatentStats s{{x.begin() + n_geo, x.begin() + n_geo + latent},
                    {x.begin() + n_geo + latent, x.end()}};
      GeometryGrad gg;
      LatentGrad lg;
      const bool want = !g.empty();
      const double f =
          loss_total(work, gt, weights, s, lambdas, want ? &gg : nullptr, want ? &lg : nullptr).total;
      if (want) {
        pack_geometry_grad(gg, g.first(n_geo));
        std::copy(lg.mu.begin(), lg.mu.end(), g.begin() + n_geo);
        std::copy(lg.var.begin(), lg.var.end(), g.begin() + n_geo + latent);
      }
      return f;
    };
    worst[0] = std::max(worst[0], check_gradients(rec, start).max_relative_error);
    worst[1] = std::max(worst[1], check_gradients(kl, lat).max_relative_error);
    worst[2] = std::max(worst[2], check_gradients(grad, start).max_relative_error);
    worst[3] = std::max(worst[3], check_gradients(total, full).max_relative_error);
  }
  const char* names[4] = {"loss_rec", "loss_kl", "loss_grad", "loss_total"};
  for (int i = 0; i < 4; ++i) {
    out.note(std::string(names[i]) + " " + fmt("%.2g", worst[i]));
    out.require(worst[i] <= 1e-4, std::string(names[i]) + " gradient within 1e-4");
  }
}

void toy_ae(Outcome& out) {
  const auto data = make_tile_dataset(404, 64);
  ToyAeConfig cfg;
  cfg.seed = 404;
  const auto result = train_toy_linear_ae(data, cfg);
  const double first = result.curve.front().total;
  const double last = result.curve.back().total;
  out.note("total loss " + fmt("%.4g", first) + " -> " + fmt("%.4g", last));
  out.require(last < first, "final loss < initial loss");

  // Gradient check of the training objective at the initial and final
  // parameters, on a random subset of coordinates.
  const auto init = ToyAeModel::random(data[0].gt.pointmap.points.size() * 9, cfg.latent_dim, cfg.seed);
  Rng rng(405);
  Eigen::MatrixXd noise(cfg.latent_dim, static_cast<int>(data.size()));
  std::normal_distribution<double> normal;
  for (int i = 0; i < noise.size(); ++i) noise.data()[i] = normal(rng);
  const auto f = toy_ae_objective(data, init, noise, cfg.lambdas);
  double worst = 0.0;
  for (const auto* model : {&init, &result.model}) {
    const auto x = model->pack();
    GradCheckOptions opt;
    std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
    for (int i = 0; i < 200; ++i) opt.indices.push_back(pick(rng));
    worst = std::max(worst, check_gradients(f, x, opt).max_relative_error);
  }
  out.note("gradient check " + fmt("%.2g", worst));
  out.require(worst <= 1e-4, "training gradient within 1e-4");
}

void diffusion(Outcome& out) {
  double worst_vp = 0.0;
  bool endpoints = true;
  for (auto kind : {ScheduleKind::kLinearBeta, ScheduleKind::kCosine}) {
    const auto base = make_schedule(kind, 1000);
    const auto zero = rescale_zero_terminal_snr(base);
    for (const auto* s : {&base, &zero}) {
      for (int t = 0; t <= s->steps(); ++t) {
        worst_vp = std::max(worst_vp, std::abs(s->alpha(t) * s->alpha(t) + s->sigma(t) * s->sigma(t) - 1.0));
      }
    }
    endpoints = endpoints && zero.alpha(1000) == 0.0 && zero.sigma(1000) == 1.0;
  }
  out.require(worst_vp <= 1e-12, "alpha^2 + sigma^2 = 1");
  out.require(endpoints, "alpha_T = 0 and sigma_T = 1 after rescale");

  const auto sched = rescale_zero_terminal_snr(make_schedule(ScheduleKind::kCosine, 1000));
  Rng rng(505);
  std::normal_distribution<double> normal;
  double worst_rt = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int t = std::uniform_int_distribution<int>(0, 1000)(rng);
    std::vector<double> x0(4), eps(4);
    for (auto& v : x0) v = 3.0 * normal(rng);
    for (auto& v : eps) v = normal(rng);
    const auto xt = forward_diffuse(x0, t, eps, sched);
    const auto v = v_from(x0, eps, t, sched);
    const auto x0b = x0_from_v(xt, v, t, sched);
    const auto epsb = eps_from_v(xt, v, t, sched);
    for (int i = 0; i < 4; ++i) {
      worst_rt = std::max({worst_rt, std::abs(x0b[i] - x0[i]), std::abs(epsb[i] - eps[i])});
    }
  }
  out.require(worst_rt <= 1e-9, "v round trips within 1e-9");

  const std::vector<double> target{0.5, -0.25, 0.75};
  const auto delta = sample(DeltaDenoiser(target), sched, 50, 0.0, 506, {1000, 3});
  double worst_delta = 0.0;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    worst_delta = std::max(worst_delta, std::abs(delta[i] - target[i % 3]));
  }
  out.require(worst_delta <= 1e-6, "50-step eta=0 delta oracle within 1e-6");

  // Stochastic sampling: 1000 steps (see the README); 50 steps is biased by
  // the discretization itself, not by the oracle.
  const auto t0 = Clock::now();
  Eigen::Matrix2d cov;
  cov << 0.5, 0.1, 0.1, 0.2;
  const Eigen::Vector2d mean(1.0, -0.5);
  const GaussianMixtureDenoiser gauss({{1.0, mean, cov}});
  const int n = 10000;
  const auto xs = sample(gauss, sched, 1000, 1.0, 507, {n, 2});
  double worst_rel = 0.0;
  for (int d = 0; d < 2; ++d) {
    double m = 0.0, v = 0.0;
    for (int i = 0; i < n; ++i) m += xs[2 * i + d];
    m /= n;
    for (int i = 0; i < n; ++i) v += (xs[2 * i + d] - m) * (xs[2 * i + d] - m);
    v /= n - 1;
    worst_rel = std::max({worst_rel, std::abs(m - mean[d]) / std::abs(mean[d]),
                          std::abs(v - cov(d, d)) / cov(d, d)});
  }
  const double secs = seconds_since(t0);
  out.note("v round trip " + fmt("%.2g", worst_rt) + ", delta " + fmt("%.2g", worst_delta) +
           ", eta=1 Gaussian rel err " + fmt("%.3f", worst_rel) + " in " + fmt("%.1f s", secs));
  out.require(worst_rel <= 0.05, "eta=1 Gaussian mean/variance within 5%");
  out.require(secs <= 60.0, "eta=1 sampling <= 60 s");
}

void metrics(Outcome& out) {
  Rng rng(606);
  DepthMap gt(32, 32), pred(32, 32);
  for (std::size_t i = 0; i < gt.depth.size(); ++i) {
    gt.depth[i] = uniform(rng, 0.1, 20.0);
    pred.depth[i] = 1.01 * gt.depth[i];
    gt.valid[i] = pred.valid[i] = 1;
  }
  const double absrel = metric_absrel(pred, gt);
  const double delta = metric_delta(pred, gt);
  out.require(std::abs(absrel - 0.01) <= 1e-12, "AbsRel(1.01 z) = 0.01");
  out.require(delta == 0.0, "delta_1.01(1.01 z) = 0");

  const auto k = random_intrinsics(rng, 40, 30);
  const auto pose = random_pose(rng);
  DepthMap depth(40, 30);
  for (std::size_t i = 0; i < depth.depth.size(); ++i) {
    depth.depth[i] = uniform(rng, 0.5, 10.0);
    depth.valid[i] = 1;
  }
  const double duv = metric_duv(unproject_depth(k, pose, depth), k, pose);
  out.require(duv <= 1e-9, "unprojected depth has duv = 0");

  Image a(8, 8, 3, 0.5), b(8, 8, 3, 0.6);
  const double psnr = metric_psnr(a, b);
  out.require(std::abs(psnr - 20.0) <= 1e-12, "PSNR at MSE 0.01 = 20 dB");
  Image x(24, 24, 3);
  for (auto& v : x.data()) v = uniform(rng, 0.0, 1.0);
  const double ssim = metric_ssim(x, x);
  out.require(std::abs(ssim - 1.0) <= 1e-12, "SSIM(x, x) = 1");
  out.note("AbsRel " + fmt("%.15g", absrel) + ", delta " + fmt("%g", delta) + ", duv " +
           fmt("%.2g", duv) + ", PSNR " + fmt("%.15g", psnr) + ", SSIM " + fmt("%.15g", ssim));
}

void end_to_end(Outcome& out) {
  const auto t0 = Clock::now();
  const fs::path dir = fs::temp_directory_path() / "splatgen_acceptance_e2e";
  fs::remove_all(dir);
  SynthesizeConfig sc;
  sc.out = dir;
  sc.resolution = 128;
  sc.views = 5;
  sc.seed = 7;
  const auto manifest = cmd_synthesize(sc);
  ReconstructConfig rc;
  rc.manifest = manifest;
  const auto rec = cmd_reconstruct(rc);
  EvalConfig ec;
  ec.manifest = manifest;
  ec.role = "source";
  const auto records = cmd_eval(ec);
  const double secs = seconds_since(t0);

  double min_gain = INFINITY;
  for (const auto& r : records) min_gain = std::min(min_gain, r.psnr - r.baseline_psnr);
  ec.role = "heldout";
  double min_heldout = INFINITY;
  for (const auto& r : cmd_eval(ec)) min_heldout = std::min(min_heldout, r.psnr - r.baseline_psnr);
  out.note(std::to_string(records.size()) + " source views, " + std::to_string(rec.gaussians) +
           " Gaussians, min gain " + fmt("%.2f dB", min_gain) + " (held-out " +
           fmt("%.2f dB", min_heldout) + "), " + fmt("%.1f s", secs));
  out.require(records.size() == 5, "5 source views evaluated");
  out.require(min_gain >= 10.0, "PSNR gain over constant-mean baseline >= 10 dB");
  out.require(secs <= 60.0, "synthesize + reconstruct + render <= 60 s");
  fs::remove_all(dir);
}

void asset_format(Outcome& out) {
  Rng rng(808);
  for (std::size_t n : {1u, 255u, 256u, 257u, 1000u}) {
    const auto scene = random_gaussian_scene(rng, static_cast<int>(n));
    SplatFileInfo info;
    const auto back = decode_splat(encode_splat(scene), &info);
    out.require(info.chunk_count == (n + 255) / 256, "chunk count = ceil(N / 256)");
    out.require(back.size() == n, "Gaussian count preserved");
    // Quantization tolerances: half a step of each quantization grid.
    for (std::size_t c = 0; c < info.chunk_count; ++c) {
      const auto& b = info.bounds[c];
      for (std::size_t i = c * 256; i < std::min(n, (c + 1) * 256); ++i) {
        const auto& g0 = scene.gaussians[i];
        const auto& g1 = back.gaussians[i];
        for (int k = 0; k < 3; ++k) {
          const double pstep = (double(b.position_max[k]) - b.position_min[k]) / 65535;
          const double sstep = (double(b.log_scale_max[k]) - b.log_scale_min[k]) / 255;
          out.require(std::abs(g0.mean[k] - g1.mean[k]) <= 0.5 * pstep + 1e-6 * (1 + std::abs(g0.mean[k])),
                      "position within half a 16-bit step");
          out.require(std::abs(std::log(g0.scale[k]) - std::log(g1.scale[k])) <=
                          0.5 * sstep + 1e-6 * (1 + std::abs(std::log(g0.scale[k]))),
                      "log-scale within half an 8-bit step");
          out.require(std::abs(g0.color[k] - g1.color[k]) <= 0.5 / 255 + 1e-12, "color within 1/510");
        }
        out.require(std::abs(g0.opacity - g1.opacity) <= 0.5 / 255 + 1e-12, "opacity within 1/510");
        out.require(std::abs(g0.rotation.dot(g1.rotation)) >= 1.0 - 1e-4, "rotation |<q, q'>| >= 1 - 1e-4");
      }
    }
  }

  const auto scene = random_gaussian_scene(rng, 10000);
  const auto k = CameraIntrinsics::from_hfov(64, 64, 60.0);
  const auto a = render_tiled(scene, k, CameraPose::identity(), 16);
  const auto b = render_tiled(decode_splat(encode_splat(scene)), k, CameraPose::identity(), 16);
  const double psnr = metric_psnr(a.rgb, b.rgb);
  out.require(psnr >= 45.0, "re-render PSNR >= 45 dB");

  const auto good = encode_splat(random_gaussian_scene(rng, 300));
  int rejected = 0, cases = 0;
  auto expect_reject = [&](std::vector<std::uint8_t> bytes) {
    ++cases;
    try {
      decode_splat(bytes);
    } catch (const FormatError& e) {
      if (std::strlen(e.what()) > 0) ++rejected;
    }
  };
  auto with = [&](auto&& f) {
    auto b2 = good;
    f(b2);
    return b2;
  };
  expect_reject(with([](auto& v) { v[1] = 'Q'; }));          // magic
  expect_reject(with([](auto& v) { v[4] = 9; }));            // version
  expect_reject(with([](auto& v) { v[12] = 7; }));           // chunk count
  expect_reject(with([](auto& v) { v[8] = 1; }));            // Gaussian count
  expect_reject(with([](auto& v) { v.resize(v.size() - 5); }));
  expect_reject(with([](auto& v) { v.push_back(0); }));
  expect_reject(with([](auto& v) { v[16] = 3; }));           // per-chunk count
  expect_reject(with([](auto& v) { v[16 + 52 + 13] = 9; })); // rotation index
  expect_reject({});
  out.require(rejected == cases, "corrupt files rejected with FormatError");
  out.note("re-render PSNR " + fmt("%.2f dB", psnr) + ", " + std::to_string(rejected) + "/" +
           std::to_string(cases) + " corruptions rejected");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
      {"rasterizer oracle equivalence", rasterizer},
      {"calibration contract", calibration},
      {"normalization contract", normalization},
      {"loss suite", loss_suite},
      {"toy AE training", toy_ae},
      {"diffusion algebra", diffusion},
      {"metric suite", metrics},
      {"end-to-end pipeline", end_to_end},
      {"asset format", asset_format},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome out;
    try {
      run(out);
    } catch (const std::exception& e) {
      out.require(false, std::string("exception: ") + e.what());
    }
    std::printf("%s  %s  (%s)\n", out.ok() ? "PASS" : "FAIL", name, out.detail().c_str());
    std::fflush(stdout);
    failed += !out.ok();
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
