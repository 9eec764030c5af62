#ifndef CFSEAM_METRICS_HPP
#define CFSEAM_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "cfseam/core.hpp"
#include "cfseam/evaluation.hpp"
#include "cfseam/graphcut.hpp"

namespace cfseam {

/// Population variance at or below this counts as a flat patch.
inline constexpr double kFlatVariance = 1e-18;
/// Flat patches closer than this in mean count as equal.
inline constexpr double kFlatMeanTolerance = 1e-12;

/// Zero-mean normalized cross correlation of the luma patches centered at
/// `center` (replicated borders). Flat patches score 1 when both are flat and
/// equal, else 0.
inline double zncc_patch(const Grid<double>& luma0, const Grid<double>& luma1, Pixel center, int patch_size) {
  std::vector<double> a;
  std::vector<double> b;
  detail::gather_patch(luma0, center, patch_size, a);
  detail::gather_patch(luma1, center, patch_size, b);
  const detail::PatchMoments m = detail::moments(a, b);
  const bool flat_a = m.var_a <= kFlatVariance;
  const bool flat_b = m.var_b <= kFlatVariance;
  if (flat_a || flat_b) {
    return (flat_a && flat_b && std::abs(m.mean_a - m.mean_b) <= kFlatMeanTolerance) ? 1.0 : 0.0;
  }
  return std::clamp(m.cov / std::sqrt(m.var_a * m.var_b), -1.0, 1.0);
}

inline std::vector<double> zncc_scores(const Seam& seam, const Grid<double>& luma0, const Grid<double>& luma1,
                                       int patch_size) {
  std::vector<double> out;
  out.reserve(seam.size());
  for (const Crossing& c : seam.crossings) out.push_back(zncc_patch(luma0, luma1, c.p, patch_size));
  return out;
}

/// Average of (1 - ZNCC) / 2 over the seam crossings.
inline double zncc_quality(const Seam& seam, const Grid<double>& luma0, const Grid<double>& luma1, int patch_size) {
  if (seam.empty()) return 0.0;
  double sum = 0.0;
  for (double z : zncc_scores(seam, luma0, luma1, patch_size)) sum += (1.0 - z) / 2.0;
  return sum / static_cast<double>(seam.size());
}

inline double zncc_quality(const Seam& seam, const Image& i0, const Image& i1, int patch_size) {
  return zncc_quality(seam, luma_plane(i0), luma_plane(i1), patch_size);
}

/// Linear-interpolated percentile, q in [0,1].
inline double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double t = pos - static_cast<double>(lo);
  return v[lo] + t * (v[hi] - v[lo]);
}

struct CrossingScore {
  Crossing crossing;
  double zncc = 0.0;
  double patch = 0.0;
  double point = 0.0;
  double combined = 0.0;
};

struct SeamReport {
  double q_seam = 0.0;
  std::size_t length = 0;
  double mean_combined = 0.0;
  double max_combined = 0.0;
  double p50_combined = 0.0;
  double p90_combined = 0.0;
  double mean_point = 0.0;
  double max_point = 0.0;
  std::vector<CrossingScore> crossings;
};

inline SeamReport seam_report(const Seam& seam, const EvaluationSignal& evals, const Image& i0, const Image& i1,
                              const StitchConfig& cfg) {
  if (evals.size() != seam.size()) throw Error(ErrorCode::LengthMismatch, "evaluation does not match the seam");
  const Grid<double> l0 = luma_plane(i0);
  const Grid<double> l1 = luma_plane(i1);
  const std::vector<double> zncc = zncc_scores(seam, l0, l1, cfg.patch_size);

  SeamReport r;
  r.length = seam.size();
  double qsum = 0.0;
  double csum = 0.0;
  double psum = 0.0;
  for (std::size_t i = 0; i < seam.size(); ++i) {
    r.crossings.push_back({seam.crossings[i], zncc[i], evals.patch_raw[i], evals.point_raw[i], evals.combined[i]});
    qsum += (1.0 - zncc[i]) / 2.0;
    csum += evals.combined[i];
    psum += evals.point_raw[i];
    r.max_combined = std::max(r.max_combined, evals.combined[i]);
    r.max_point = std::max(r.max_point, evals.point_raw[i]);
  }
  if (!seam.empty()) {
    const double n = static_cast<double>(seam.size());
    r.q_seam = qsum / n;
    r.mean_combined = csum / n;
    r.mean_point = psum / n;
  }
  r.p50_combined = percentile(evals.combined, 0.5);
  r.p90_combined = percentile(evals.combined, 0.9);
  return r;
}

inline nlohmann::json to_json(const SeamReport& r) {
  return nlohmann::json{{"q_seam", r.q_seam},
                        {"seam_length", r.length},
                        {"evaluation",
                         {{"mean", r.mean_combined},
                          {"max", r.max_combined},
                          {"p50", r.p50_combined},
                          {"p90", r.p90_combined}}},
                        {"point_evaluation", {{"mean", r.mean_point}, {"max", r.max_point}}}};
}

inline void write_crossing_csv(std::ostream& os, const SeamReport& r) {
  os << "index,px,py,qx,qy,zncc,patch,point,combined\n";
  const auto old = os.precision(17);
  for (std::size_t i = 0; i < r.crossings.size(); ++i) {
    const CrossingScore& c = r.crossings[i];
    os << i << ',' << c.crossing.p.x << ',' << c.crossing.p.y << ',' << c.crossing.q.x << ',' << c.crossing.q.y << ','
       << c.zncc << ',' << c.patch << ',' << c.point << ',' << c.combined << '\n';
  }
  os.precision(old);
}

}  // namespace cfseam

#endif  // CFSEAM_METRICS_HPP
