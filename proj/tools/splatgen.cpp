// Command-line entry point: synthesize, reconstruct, render, eval, sample.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "splatgen/pipeline.hpp"

namespace {

using namespace splatgen;

void add_render_flags(CLI::App* cmd, int& tile_size, unsigned& threads) {
  cmd->add_option("--tile-size", tile_size, "Rasterizer tile edge in pixels")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--threads", threads, "Render threads (0 = all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feed-forward Gaussian splat scene toolkit"};
  app.set_config("--config", "", "TOML/INI file with option defaults");
  app.require_subcommand(1);

  SynthesizeConfig synth;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synthesize", "Ray-trace a procedural scene");
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--resolution", synth.resolution, "Square image size in pixels")
      ->check(CLI::Range(8, 1 << 14));
  synth_cmd->add_option("--views", synth.views, "Number of source views")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", synth.seed, "Scene seed");
  synth_cmd->add_option("--complexity", synth.complexity, "Extra primitives beside the hero")
      ->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--arc", synth.orbit_arc_deg, "Orbit arc in degrees");
  synth_cmd->add_flag("!--no-heldout", synth.heldout, "Skip held-out views");

  ReconstructConfig recon;
  std::string recon_manifest, recon_out;
  auto* recon_cmd = app.add_subcommand("reconstruct", "Build a .splat asset from a manifest");
  recon_cmd->add_option("manifest", recon_manifest, "manifest.json")->required();
  recon_cmd->add_option("--out", recon_out, "Output .splat (default: next to manifest)");
  recon_cmd->add_option("--opacity-threshold", recon.opacity_threshold,
                        "Drop Gaussians below this opacity")
      ->check(CLI::Range(0.0, 2.0));
  recon_cmd->add_option("--opacity-logit", recon.head.opacity_logit, "Head opacity logit");
  recon_cmd->add_option("--log-scale", recon.head.log_scale, "Head footprint log-scale");

  RenderConfig render;
  std::string render_manifest, render_asset, render_out;
  auto* render_cmd = app.add_subcommand("render", "Render manifest cameras or a camera path");
  render_cmd->add_option("manifest", render_manifest, "manifest.json")->required();
  render_cmd->add_option("--asset", render_asset, ".splat asset (default: from manifest)");
  render_cmd->add_option("--out", render_out, "Output directory")->required();
  render_cmd->add_option("--role", render.role, "source, heldout or all")
      ->check(CLI::IsMember({"source", "heldout", "all"}));
  render_cmd->add_option("--path", render.path, "Camera path instead of manifest views")
      ->check(CLI::IsMember({"circular", "forward-facing", "spline"}));
  render_cmd->add_option("--views", render.path_views, "Views along --path")
      ->check(CLI::PositiveNumber);
  add_render_flags(render_cmd, render.tile_size, render.threads);

  EvalConfig eval;
  std::string eval_manifest, eval_asset, eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "Metrics against ray-traced ground truth");
  eval_cmd->add_option("manifest", eval_manifest, "manifest.json")->required();
  eval_cmd->add_option("--asset", eval_asset, ".splat asset (default: from manifest)");
  eval_cmd->add_option("--role", eval.role, "source, heldout or all")
      ->check(CLI::IsMember({"source", "heldout", "all"}));
  eval_cmd->add_option("--out", eval_out, "JSON-lines file (default: stdout)");
  add_render_flags(eval_cmd, eval.tile_size, eval.threads);

  SamplerDemoConfig sampler;
  std::string sampler_out, schedule = "cosine";
  bool no_zero_snr = false;
  auto* sampler_cmd = app.add_subcommand("sample", "DDIM sampling with a closed-form denoiser");
  sampler_cmd->alias("sampler-demo");
  sampler_cmd->add_option("--oracle", sampler.oracle, "delta, gaussian or mixture")
      ->check(CLI::IsMember({"delta", "gaussian", "mixture"}));
  sampler_cmd->add_option("--schedule", schedule, "Noise schedule")
      ->check(CLI::IsMember({"linear-beta", "cosine"}));
  sampler_cmd->add_option("--train-steps", sampler.train_steps, "Schedule length T")
      ->check(CLI::PositiveNumber);
  sampler_cmd->add_option("--steps", sampler.steps, "DDIM steps")->check(CLI::PositiveNumber);
  sampler_cmd->add_option("--eta", sampler.eta, "DDIM stochasticity")
      ->check(CLI::Range(0.0, 1.0));
  sampler_cmd->add_option("--seed", sampler.seed, "Noise seed");
  sampler_cmd->add_option("--samples", sampler.samples, "Batch size")
      ->check(CLI::PositiveNumber);
  sampler_cmd->add_flag("--no-zero-snr", no_zero_snr, "Keep the schedule's terminal SNR");
  sampler_cmd->add_option("--out", sampler_out, "Directory for trajectory and metadata");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_cmd->parsed()) {
      synth.out = synth_out;
      std::cout << cmd_synthesize(synth).string() << "\n";
    } else if (recon_cmd->parsed()) {
      recon.manifest = recon_manifest;
      recon.out = recon_out;
      const ReconstructResult r = cmd_reconstruct(recon);
      std::cout << r.asset.string() << "\n";
    } else if (render_cmd->parsed()) {
      render.manifest = render_manifest;
      render.asset = render_asset;
      render.out = render_out;
      cmd_render(render);
    } else if (eval_cmd->parsed()) {
      eval.manifest = eval_manifest;
      eval.asset = eval_asset;
      const auto records = cmd_eval(eval);
      if (eval_out.empty()) {
        write_eval_jsonl(std::cout, records);
      } else {
        std::ofstream out(eval_out);
        if (!out) throw std::runtime_error("cannot write " + eval_out);
        write_eval_jsonl(out, records);
      }
    } else if (sampler_cmd->parsed()) {
      sampler.out = sampler_out;
      sampler.schedule = parse_schedule_kind(schedule);
      sampler.zero_terminal_snr = !no_zero_snr;
      const SamplerDemoResult r = cmd_sampler_demo(sampler);
      std::cout << "terminal_error " << r.terminal_error << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "splatgen: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
