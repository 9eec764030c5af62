#ifndef CFSEAM_CLI_HPP
#define CFSEAM_CLI_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cfseam/blend.hpp"
#include "cfseam/core.hpp"
#include "cfseam/evaluation.hpp"
#include "cfseam/graphcut.hpp"
#include "cfseam/ingest.hpp"
#include "cfseam/metrics.hpp"
#include "cfseam/refine.hpp"
#include "cfseam/synth.hpp"

namespace cfseam::cli {

namespace fs = std::filesystem;

/// Process exit status per error kind; 0 is success, 1 an unexpected failure,
/// 2 a usage error.
inline int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError: return 3;
    case ErrorCode::DecodeError: return 4;
    case ErrorCode::DimensionMismatch: return 5;
    case ErrorCode::EmptyOverlap: return 6;
    case ErrorCode::SingularHomography: return 7;
    case ErrorCode::ConstraintConflict: return 8;
    case ErrorCode::EmptySeam: return 9;
    case ErrorCode::SolverDivergence: return 10;
    case ErrorCode::FormatError: return 11;
    case ErrorCode::InvalidSpec: return 12;
    case ErrorCode::InvalidConfig: return 13;
    case ErrorCode::LengthMismatch: return 14;
  }
  return 1;
}

inline const std::set<std::string>& known_emits() {
  static const std::set<std::string> k{"composite",  "naive",    "seam-overlay",      "signals-csv",
                                       "report-json", "labeling", "iteration-overlays"};
  return k;
}

inline std::set<std::string> default_emits() {
  return {"composite", "seam-overlay", "signals-csv", "report-json", "labeling"};
}

/// Config values given on the command line; unset fields defer to the config file.
struct ConfigOverrides {
  std::optional<int> patch_size;
  std::optional<double> lambda;
  std::optional<double> sigma;
  std::optional<double> epsilon;
  std::optional<int> band_radius;
  std::optional<int> max_iterations;
  std::optional<std::string> smoothing;
  std::optional<double> poisson_tolerance;
  std::optional<bool> compounding;
  std::optional<std::vector<std::string>> emit;
};

struct JobSpec {
  fs::path reference;
  fs::path target;
  std::optional<fs::path> homography;
  std::optional<fs::path> config;
  fs::path output;
  ConfigOverrides overrides;
  /// Labeling to score (evaluate only).
  std::optional<fs::path> labeling;
};

struct ResolvedJob {
  StitchConfig config;
  std::set<std::string> emit;
};

inline nlohmann::json to_json(const StitchConfig& c) {
  return nlohmann::json{{"patch_size", c.patch_size},
                        {"lambda", c.lambda},
                        {"sigma", c.sigma},
                        {"epsilon", c.epsilon},
                        {"band_radius", c.band_radius},
                        {"max_iterations", c.max_iterations},
                        {"smoothing", std::string(to_string(c.smoothing))},
                        {"poisson_tolerance", c.poisson_tolerance},
                        {"compounding", c.compounding}};
}

/// Reads a config file whose keys mirror StitchConfig fields (plus "emit")
/// into `o`, leaving values already present in `o` untouched.
inline void merge_config_file(const fs::path& path, ConfigOverrides& o) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, "'" + path.string() + "': " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "'" + path.string() + "' must hold a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "patch_size") {
        if (!o.patch_size) o.patch_size = value.get<int>();
      } else if (key == "lambda") {
        if (!o.lambda) o.lambda = value.get<double>();
      } else if (key == "sigma") {
        if (!o.sigma) o.sigma = value.get<double>();
      } else if (key == "epsilon") {
        if (!o.epsilon) o.epsilon = value.get<double>();
      } else if (key == "band_radius") {
        if (!o.band_radius) o.band_radius = value.get<int>();
      } else if (key == "max_iterations") {
        if (!o.max_iterations) o.max_iterations = value.get<int>();
      } else if (key == "smoothing") {
        if (!o.smoothing) o.smoothing = value.get<std::string>();
      } else if (key == "poisson_tolerance") {
        if (!o.poisson_tolerance) o.poisson_tolerance = value.get<double>();
      } else if (key == "compounding") {
        if (!o.compounding) o.compounding = value.get<bool>();
      } else if (key == "emit") {
        if (!o.emit) o.emit = value.get<std::vector<std::string>>();
      } else {
        throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, "'" + path.string() + "': " + e.what());
  }
}

/// CLI flag > config file > default.
inline ResolvedJob resolve(const JobSpec& job) {
  ConfigOverrides o = job.overrides;
  if (job.config) merge_config_file(*job.config, o);
  ResolvedJob r;
  StitchConfig& c = r.config;
  if (o.patch_size) c.patch_size = *o.patch_size;
  if (o.lambda) c.lambda = *o.lambda;
  if (o.sigma) c.sigma = *o.sigma;
  if (o.epsilon) c.epsilon = *o.epsilon;
  if (o.band_radius) c.band_radius = *o.band_radius;
  if (o.max_iterations) c.max_iterations = *o.max_iterations;
  if (o.smoothing) c.smoothing = parse_smoothing(*o.smoothing);
  if (o.poisson_tolerance) c.poisson_tolerance = *o.poisson_tolerance;
  if (o.compounding) c.compounding = *o.compounding;
  c.validate();
  if (o.emit) {
    for (const std::string& e : *o.emit) {
      if (!known_emits().contains(e)) throw Error(ErrorCode::InvalidConfig, "unknown emit target '" + e + "'");
      r.emit.insert(e);
    }
  } else {
    r.emit = default_emits();
  }
  return r;
}

inline void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::IoError, "cannot create output directory '" + dir.string() + "'");
}

inline void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) throw Error(ErrorCode::IoError, std::string(what) + " '" + p.string() + "' does not exist");
}

inline void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + p.string() + "'");
  out << text;
}

inline void write_json(const fs::path& p, const nlohmann::json& j) { write_text(p, j.dump(2) + "\n"); }

inline void write_signal(const fs::path& p, const EvaluationSignal& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + p.string() + "'");
  write_signal_csv(out, s);
}

inline AlignedPair load_pair(const JobSpec& job) {
  require_file(job.reference, "reference image");
  require_file(job.target, "target image");
  const Image ref = load_image(job.reference);
  const Image tgt = load_image(job.target);
  std::optional<Homography> h;
  if (job.homography) {
    require_file(*job.homography, "homography");
    h = load_homography(*job.homography);
  }
  return assemble_pair(ref, tgt, h);
}

inline std::string numbered(const char* stem, int k, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%03d.%s", stem, k, ext);
  return buf;
}

/// Full pipeline: refine the seam, fuse, and write the requested outputs.
/// Returns the report that `report.json` holds.
inline nlohmann::json cmd_stitch(const JobSpec& job) {
  const ResolvedJob rj = resolve(job);
  const StitchConfig& cfg = rj.config;
  const AlignedPair pair = load_pair(job);
  ensure_directory(job.output);

  const RefineResult result = run(pair, cfg);
  const RefineState& st = result.state;
  const Composite fused = poisson_fuse(pair, result.labeling, cfg.poisson_tolerance);
  save_image(fused.image, job.output / "composite.png");

  const SeamReport report = seam_report(result.seam, st.final_signal, pair.reference, pair.target, cfg);
  const Grid<double> l0 = luma_plane(pair.reference);
  const Grid<double> l1 = luma_plane(pair.target);
  const Seam& initial = st.history.empty() ? result.seam : st.history.front().seam;

  nlohmann::json j = to_json(report);
  j["converged"] = st.converged;
  j["iterations"] = st.iteration;
  j["initial_q_seam"] = zncc_quality(initial, l0, l1, cfg.patch_size);
  j["canvas"] = {{"width", pair.canvas().width}, {"height", pair.canvas().height}};
  j["overlap_pixels"] = pair.region.size();
  j["diagnostics"] = diagnostics_json(st);
  j["config"] = to_json(cfg);

  const auto& emit = rj.emit;
  if (emit.contains("naive")) save_image(composite_naive(pair, result.labeling).image, job.output / "naive.png");
  if (emit.contains("seam-overlay")) {
    save_overlay(fused.image, result.seam, st.final_signal.combined, job.output / "seam_overlay.png");
  }
  if (emit.contains("signals-csv")) {
    for (const IterationRecord& rec : st.history) write_signal(job.output / numbered("signals", rec.iteration, "csv"), rec.signal);
    write_signal(job.output / numbered("signals", st.iteration, "csv"), st.final_signal);
  }
  if (emit.contains("iteration-overlays")) {
    for (const IterationRecord& rec : st.history) {
      save_overlay(fused.image, rec.seam, rec.signal.combined, job.output / numbered("seam_overlay", rec.iteration, "png"));
    }
  }
  if (emit.contains("labeling")) {
    save_labeling(result.labeling, pair.canvas(), job.output / "labeling.pgm", job.output / "labeling.json");
  }
  if (emit.contains("report-json")) write_json(job.output / "report.json", j);
  return j;
}

/// Scores an existing labeling without re-cutting; writes report.json,
/// signals.csv and crossings.csv.
inline nlohmann::json cmd_evaluate(const JobSpec& job) {
  if (!job.labeling) throw Error(ErrorCode::FormatError, "no labeling given");
  const ResolvedJob rj = resolve(job);
  const StitchConfig& cfg = rj.config;
  const AlignedPair pair = load_pair(job);
  fs::path sidecar = *job.labeling;
  sidecar.replace_extension(".json");
  require_file(*job.labeling, "labeling");
  const LoadedLabeling loaded = load_labeling(*job.labeling, sidecar);
  if (loaded.canvas != pair.canvas() || loaded.labeling.box() != pair.region.bbox) {
    throw Error(ErrorCode::FormatError, "labeling geometry does not match the image pair");
  }
  Seam seam;
  try {
    seam = extract_seam(loaded.labeling, pair.region);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::EmptySeam) throw Error(ErrorCode::FormatError, "labeling has no seam (constant labels)");
    throw;
  }
  ensure_directory(job.output);
  const EvaluationSignal signal = evaluate_seam(seam, pair.reference, pair.target, cfg);
  const SeamReport report = seam_report(seam, signal, pair.reference, pair.target, cfg);
  nlohmann::json j = to_json(report);
  j["config"] = to_json(cfg);
  write_signal(job.output / "signals.csv", signal);
  {
    std::ofstream out(job.output / "crossings.csv", std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write crossings.csv");
    write_crossing_csv(out, report);
  }
  write_json(job.output / "report.json", j);
  return j;
}

/// Writes reference.png and target.png (cropped footprints), the two mask
/// PNGs, a translation homography placing the target, and the resolved spec.
inline void cmd_fixture(const std::optional<fs::path>& spec_path, const fs::path& outdir) {
  FixtureSpec spec;
  if (spec_path) {
    std::ifstream in(*spec_path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open spec '" + spec_path->string() + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InvalidSpec, "'" + spec_path->string() + "': " + e.what());
    }
    spec = fixture_spec_from_json(j);
  }
  const Fixture f = make_fixture(spec);
  ensure_directory(outdir);
  save_image(fixture_reference_crop(f), outdir / "reference.png");
  save_image(fixture_target_crop(f), outdir / "target.png");
  save_mask(f.misaligned, outdir / "misaligned_mask.png");
  save_mask(f.corridor, outdir / "corridor_mask.png");
  const double dx = spec.overlap_left();
  write_json(outdir / "homography.json", nlohmann::json::array({1.0, 0.0, dx, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0}));
  write_json(outdir / "spec.json", to_json(spec));
}

}  // namespace cfseam::cli

#endif  // CFSEAM_CLI_HPP
