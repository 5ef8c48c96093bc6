#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "splatgen/diffusion.hpp"
#include "splatgen/manifest.hpp"
#include "splatgen/splat_model.hpp"

namespace splatgen {

inline constexpr int kDefaultResolution = 512;
inline constexpr int kDefaultViews = 16;
inline constexpr int kDefaultSamplerSteps = 50;
inline constexpr const char* kEvalSchema = "splatgen.eval/1";
inline constexpr const char* kSamplerSchema = "splatgen.sampler/1";

struct SynthesizeConfig {
  std::filesystem::path out;
  int resolution = kDefaultResolution;
  /// Source views; views - 1 held-out views are placed between them.
  int views = kDefaultViews;
  std::uint64_t seed = 0;
  int complexity = 3;
  double orbit_radius = 3.0;
  double orbit_height = 0.8;
  double orbit_arc_deg = 60.0;
  bool heldout = true;
};

/// Ray-traces a generated scene from an orbit of cameras and writes images,
/// depth maps, pointmaps and manifest.json into `out`. Cameras and points
/// are normalized by the first source view. Returns the manifest path.
std::filesystem::path cmd_synthesize(const SynthesizeConfig& config);

struct ReconstructConfig {
  std::filesystem::path manifest;
  /// Defaults to scene.splat next to the manifest.
  std::filesystem::path out;
  double opacity_threshold = 0.01;
  HeadParams head;
};

struct ReconstructResult {
  std::filesystem::path asset;
  std::size_t gaussians_before_cull = 0;
  std::size_t gaussians = 0;
  double seconds = 0.0;
};

/// calibrate -> analytic head -> merge -> cull -> export, over the source
/// views. Records the asset in the manifest.
ReconstructResult cmd_reconstruct(const ReconstructConfig& config);

struct RenderConfig {
  std::filesystem::path manifest;
  /// Defaults to the asset recorded in the manifest.
  std::filesystem::path asset;
  std::filesystem::path out;
  /// "source", "heldout" or "all"; ignored when `path` is set.
  std::string role = "source";
  /// Optional camera path ("circular", "forward-facing", "spline") sampled
  /// from the source cameras.
  std::string path;
  int path_views = 16;
  int tile_size = 16;
  unsigned threads = 0;
};

/// Writes render_XXX.png and render_XXX_depth.pfm per camera. Returns the
/// number of images written.
int cmd_render(const RenderConfig& config);

struct EvalConfig {
  std::filesystem::path manifest;
  std::filesystem::path asset;
  /// "source", "heldout" or "all".
  std::string role = "heldout";
  int tile_size = 16;
  unsigned threads = 0;
};

struct EvalRecord {
  int view = 0;
  std::string role;
  double psnr = 0.0;
  double ssim = 0.0;
  /// PSNR of the per-channel mean color of the ground truth.
  double baseline_psnr = 0.0;
  double absrel = 0.0;
  double delta = 0.0;
  /// Source views only: pixel reprojection error of the calibrated pointmap.
  std::optional<double> duv;
  double render_seconds = 0.0;
};

/// Renders every selected view and compares it against the ray-traced
/// ground truth. Depth metrics use pixels with rendered alpha >= 0.5.
std::vector<EvalRecord> cmd_eval(const EvalConfig& config);

/// One JSON object per record plus a final "mean" summary line.
void write_eval_jsonl(std::ostream& out, const std::vector<EvalRecord>& records);

struct SamplerDemoConfig {
  std::filesystem::path out;
  /// "delta", "gaussian" or "mixture".
  std::string oracle = "delta";
  ScheduleKind schedule = ScheduleKind::kCosine;
  int train_steps = 1000;
  int steps = kDefaultSamplerSteps;
  double eta = 0.0;
  std::uint64_t seed = 0;
  int samples = 1000;
  bool zero_terminal_snr = true;
};

struct SamplerDemoResult {
  /// delta: max |x - target|. gaussian / mixture: max relative error of the
  /// per-dimension sample mean and variance against the data.
  double terminal_error = 0.0;
  std::vector<double> sample_mean;
  std::vector<double> sample_var;
  std::vector<double> data_mean;
  std::vector<double> data_var;
};

/// Runs the DDIM sampler with a closed-form oracle. When `out` is set,
/// writes trajectory.f32 (steps + 1 states, each samples x dim float32) and
/// sampler.json.
SamplerDemoResult cmd_sampler_demo(const SamplerDemoConfig& config);

}  // namespace splatgen
