#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "cfseam/cli.hpp"

namespace {

using cfseam::cli::JobSpec;

void add_config_flags(CLI::App& cmd, JobSpec& job, std::vector<std::string>& emit, bool& no_compounding) {
  auto& o = job.overrides;
  cmd.add_option("--config", job.config, "JSON config mirroring StitchConfig fields");
  cmd.add_option("--emit", emit, "outputs: composite,naive,seam-overlay,signals-csv,report-json,labeling,iteration-overlays")
      ->delimiter(',');
  cmd.add_option("--max-iter", o.max_iterations, "re-estimation cap");
  cmd.add_flag("--no-compounding", no_compounding, "reweight the initial difference map every iteration");
  cmd.add_option("--patch-size", o.patch_size, "odd patch side for SSIM/ZNCC");
  cmd.add_option("--lambda", o.lambda, "patch-point evaluation scale");
  cmd.add_option("--sigma", o.sigma, "reweighting slope");
  cmd.add_option("--epsilon", o.epsilon, "reweighting threshold");
  cmd.add_option("--band-radius", o.band_radius, "banding area radius in pixels");
  cmd.add_option("--smoothing", o.smoothing, "wavelet | movavg | none");
  cmd.add_option("--poisson-tolerance", o.poisson_tolerance, "relative CG residual target");
}

void finish_overrides(JobSpec& job, const std::vector<std::string>& emit, bool no_compounding) {
  if (!emit.empty()) job.overrides.emit = emit;
  if (no_compounding) job.overrides.compounding = false;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coarse-to-fine seam estimation and compositing for two aligned images"};
  app.require_subcommand(1);

  JobSpec stitch;
  std::vector<std::string> stitch_emit;
  bool stitch_no_compounding = false;
  auto* s = app.add_subcommand("stitch", "estimate a seam and write the fused composite");
  s->add_option("--ref", stitch.reference, "reference image")->required();
  s->add_option("--target", stitch.target, "target image")->required();
  s->add_option("--homography", stitch.homography, "3x3 row-major target-to-reference homography (JSON or text)");
  s->add_option("--out", stitch.output, "output directory")->required();
  add_config_flags(*s, stitch, stitch_emit, stitch_no_compounding);

  JobSpec eval;
  std::vector<std::string> eval_emit;
  bool eval_no_compounding = false;
  auto* e = app.add_subcommand("evaluate", "score a saved labeling without re-cutting");
  e->add_option("--ref", eval.reference, "reference image")->required();
  e->add_option("--target", eval.target, "target image")->required();
  e->add_option("--homography", eval.homography, "3x3 row-major homography");
  e->add_option("--labeling", eval.labeling, "labeling PGM (sidecar .json next to it)")->required();
  e->add_option("--out", eval.output, "output directory")->required();
  add_config_flags(*e, eval, eval_emit, eval_no_compounding);

  std::optional<std::filesystem::path> fixture_spec;
  std::filesystem::path fixture_out;
  auto* f = app.add_subcommand("fixture", "write a synthetic fixture pair");
  f->add_option("--spec", fixture_spec, "fixture spec JSON");
  f->add_option("--out", fixture_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; every other parse failure is a usage error.
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (s->parsed()) {
      finish_overrides(stitch, stitch_emit, stitch_no_compounding);
      const auto report = cfseam::cli::cmd_stitch(stitch);
      std::cout << "converged=" << (report.at("converged").get<bool>() ? "true" : "false")
                << " iterations=" << report.at("iterations").get<int>() << " q_seam=" << report.at("q_seam").get<double>()
                << '\n';
    } else if (e->parsed()) {
      finish_overrides(eval, eval_emit, eval_no_compounding);
      const auto report = cfseam::cli::cmd_evaluate(eval);
      std::cout << "q_seam=" << report.at("q_seam").get<double>() << " seam_length=" << report.at("seam_length") << '\n';
    } else if (f->parsed()) {
      cfseam::cli::cmd_fixture(fixture_spec, fixture_out);
    }
  } catch (const cfseam::Error& err) {
    std::cerr << "cfseam: " << err.what() << '\n';
    return cfseam::cli::exit_code(err.code());
  } catch (const std::exception& err) {
    std::cerr << "cfseam: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
