#ifndef CFSEAM_REFINE_HPP
#define CFSEAM_REFINE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "cfseam/core.hpp"
#include "cfseam/evaluation.hpp"
#include "cfseam/graphcut.hpp"

namespace cfseam {

/// Overlap pixels within Chebyshev distance `radius` of a seam.
struct BandingArea {
  Mask members;
  std::size_t count = 0;
  int seam_id = 0;

  bool contains(Pixel p) const { return members.contains(p) && members[p] != 0; }
};

inline BandingArea band(const Seam& seam, int radius, const OverlapRegion& region, int seam_id = 0) {
  BandingArea area{Mask(region.canvas), 0, seam_id};
  for (const Pixel& s : seam.pixels()) {
    const int y0 = std::max(s.y - radius, 0);
    const int y1 = std::min(s.y + radius, region.canvas.height - 1);
    const int x0 = std::max(s.x - radius, 0);
    const int x1 = std::min(s.x + radius, region.canvas.width - 1);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (region.overlap(x, y) != 0 && area.members(x, y) == 0) {
          area.members(x, y) = 1;
          ++area.count;
        }
      }
    }
  }
  return area;
}

/// Reweighting factor exp(sigma * (x - epsilon)).
inline double reweight_factor(double x, double sigma, double epsilon) { return std::exp(sigma * (x - epsilon)); }

/// Reweighted costs are capped to keep compounded factors finite.
inline constexpr double kMaxReweightedCost = 1e100;

/// For every member of `area`, the index of the Euclidean-nearest seam crossing
/// (measured to its p and q pixels); ties go to the smaller crossing index.
/// Non-members map to -1.
inline Grid<int> nearest_crossing(const Seam& seam, const BandingArea& area) {
  const Size canvas = area.members.size();
  // Smallest crossing index touching each pixel.
  Grid<int> owner(canvas, -1);
  for (std::size_t i = 0; i < seam.size(); ++i) {
    for (const Pixel& s : {seam.crossings[i].p, seam.crossings[i].q}) {
      int& o = owner[s];
      if (o < 0) o = static_cast<int>(i);
    }
  }
  Grid<int> nearest(canvas, -1);
  if (seam.empty()) return nearest;
  for (std::size_t idx = 0; idx < area.members.data().size(); ++idx) {
    if (area.members.data()[idx] == 0) continue;
    const Pixel m = area.members.pixel(idx);
    int best = -1;
    long best_d2 = std::numeric_limits<long>::max();
    for (int r = 0;; ++r) {
      // Ring at Chebyshev distance r; every pixel on it is at least r away.
      if (best >= 0 && static_cast<long>(r) * r > best_d2) break;
      for (int dy = -r; dy <= r; ++dy) {
        const bool edge_row = dy == -r || dy == r;
        const int step = edge_row ? 1 : 2 * r;
        for (int dx = -r; dx <= r; dx += std::max(step, 1)) {
          const Pixel q{m.x + dx, m.y + dy};
          if (!canvas.contains(q)) continue;
          const int o = owner[q];
          if (o < 0) continue;
          const long d2 = static_cast<long>(dx) * dx + static_cast<long>(dy) * dy;
          if (d2 < best_d2 || (d2 == best_d2 && o < best)) {
            best_d2 = d2;
            best = o;
          }
        }
      }
    }
    nearest[m] = best;
  }
  return nearest;
}

/// Scales band costs by the reweighting factor of each pixel's nearest crossing;
/// costs outside the band are copied unchanged.
inline DifferenceMap reweight(const DifferenceMap& diff, const Seam& seam, std::span<const double> evals,
                              const BandingArea& area, const StitchConfig& cfg) {
  if (evals.size() != seam.size()) throw Error(ErrorCode::LengthMismatch, "one evaluation per seam crossing required");
  DifferenceMap out = diff;
  const Grid<int> nearest = nearest_crossing(seam, area);
  const Rect& box = diff.box();
  for (int y = box.y; y < box.y + box.height; ++y) {
    for (int x = box.x; x < box.x + box.width; ++x) {
      const Pixel p{x, y};
      if (!diff.present(p) || !area.contains(p)) continue;
      const int k = nearest[p];
      if (k < 0) continue;
      const double f = reweight_factor(evals[static_cast<std::size_t>(k)], cfg.sigma, cfg.epsilon);
      out[p] = std::min(f * diff[p], kMaxReweightedCost);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Coarse-to-fine loop
// ---------------------------------------------------------------------------

inline double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double max_of(std::span<const double> v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

struct IterationRecord {
  int iteration = 0;
  Seam seam;
  EvaluationSignal signal;
  std::size_t band_size = 0;
  std::size_t accumulated_size = 0;
};

struct RefineState {
  /// Number of re-estimations performed.
  int iteration = 0;
  bool converged = false;
  DifferenceMap initial_diff;
  DifferenceMap diff;
  Seam seam;
  Labeling labeling;
  /// Union of all banding areas so far.
  Mask accumulated;
  std::size_t accumulated_size = 0;
  /// One record per evaluated seam, starting with the initial cut.
  std::vector<IterationRecord> history;
  /// Evaluation of the returned seam.
  EvaluationSignal final_signal;
};

struct RefineResult {
  Seam seam;
  Labeling labeling;
  RefineState state;
};

inline bool seam_within(const Seam& seam, const Mask& area) {
  for (const Crossing& c : seam.crossings) {
    if (area[c.p] == 0 || area[c.q] == 0) return false;
  }
  return true;
}

inline Labeling cut(const DifferenceMap& diff, const OverlapRegion& region) {
  return min_cut(build_energy(diff, region));
}

/// Evaluate, band, reweight and re-cut until the new seam lies inside the
/// union of all previous bands, or `max_iterations` re-cuts were made.
inline RefineResult run(const AlignedPair& pair, const StitchConfig& cfg) {
  cfg.validate();
  const OverlapRegion& region = pair.region;
  const EvaluationContext ctx(pair.reference, pair.target);

  RefineState st;
  st.initial_diff = difference_map(pair.reference, pair.target, region);
  st.diff = st.initial_diff;
  st.accumulated = Mask(region.canvas);
  st.labeling = cut(st.diff, region);
  st.seam = extract_seam(st.labeling, region);

  while (!seam_within(st.seam, st.accumulated)) {
    if (st.iteration >= cfg.max_iterations) break;
    IterationRecord rec;
    rec.iteration = st.iteration;
    rec.seam = st.seam;
    rec.signal = evaluate_seam(st.seam, ctx, cfg);

    const BandingArea area = band(st.seam, cfg.band_radius, region, st.iteration);
    const DifferenceMap& base = cfg.compounding ? st.diff : st.initial_diff;
    DifferenceMap next = reweight(base, st.seam, rec.signal.combined, area, cfg);

    Labeling labeling = cut(next, region);
    Seam seam = extract_seam(labeling, region);

    for (std::size_t i = 0; i < area.members.data().size(); ++i) {
      if (area.members.data()[i] != 0 && st.accumulated.data()[i] == 0) {
        st.accumulated.data()[i] = 1;
        ++st.accumulated_size;
      }
    }
    rec.band_size = area.count;
    rec.accumulated_size = st.accumulated_size;
    st.history.push_back(std::move(rec));

    st.diff = std::move(next);
    st.labeling = std::move(labeling);
    st.seam = std::move(seam);
    ++st.iteration;
  }
  st.converged = seam_within(st.seam, st.accumulated);
  st.final_signal = evaluate_seam(st.seam, ctx, cfg);
  return {st.seam, st.labeling, std::move(st)};
}

/// One row per evaluated seam: iteration, seam length, mean/max combined
/// evaluation, band size, converged flag.
inline nlohmann::json diagnostics_json(const RefineState& st) {
  auto row = [](int iteration, const Seam& seam, const EvaluationSignal& s, std::size_t band_size,
                std::size_t accumulated, bool converged) {
    return nlohmann::json{{"iteration", iteration},
                          {"seam_length", seam.size()},
                          {"mean_combined", mean_of(s.combined)},
                          {"max_combined", max_of(s.combined)},
                          {"band_size", band_size},
                          {"accumulated_size", accumulated},
                          {"converged", converged}};
  };
  nlohmann::json out = nlohmann::json::array();
  for (const IterationRecord& rec : st.history) {
    out.push_back(row(rec.iteration, rec.seam, rec.signal, rec.band_size, rec.accumulated_size, false));
  }
  out.push_back(row(st.iteration, st.seam, st.final_signal, 0, st.accumulated_size, st.converged));
  return out;
}

}  // namespace cfseam

#endif  // CFSEAM_REFINE_HPP
