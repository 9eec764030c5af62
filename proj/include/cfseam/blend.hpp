#ifndef CFSEAM_BLEND_HPP
#define CFSEAM_BLEND_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "cfseam/core.hpp"
#include "cfseam/graphcut.hpp"

namespace cfseam {

enum class Provenance : std::uint8_t { Empty = 0, Reference = 1, Target = 2, Blended = 3 };

struct Composite {
  Image image;
  Grid<Provenance> provenance;
};

/// Copies each overlap pixel from the image its label selects; exclusive
/// regions copy their only source.
inline Composite composite_naive(const AlignedPair& pair, const Labeling& labeling) {
  const Size canvas = pair.canvas();
  Composite out{Image(canvas), Grid<Provenance>(canvas, Provenance::Empty)};
  for (int y = 0; y < canvas.height; ++y) {
    for (int x = 0; x < canvas.width; ++x) {
      const Pixel p{x, y};
      Provenance src = Provenance::Empty;
      if (pair.region.overlap[p]) {
        src = labeling[p] == kReference ? Provenance::Reference : Provenance::Target;
      } else if (pair.region.reference_only[p]) {
        src = Provenance::Reference;
      } else if (pair.region.target_only[p]) {
        src = Provenance::Target;
      }
      out.provenance[p] = src;
      if (src == Provenance::Reference) out.image.set(p, pair.reference.color(p));
      if (src == Provenance::Target) out.image.set(p, pair.target.color(p));
    }
  }
  return out;
}

/// Per-channel linear system of the gradient-domain fusion.
///
/// Unknowns are the target-side pixels (target-labeled overlap plus
/// target-only). Each row reads
///   |N_p| u_p - sum_{q in N_p, unknown} u_q = sum_{q in N_p, known} f*_q + sum_{q in N_p} v_pq
/// where N_p are the covered 4-neighbors, f* the naive composite and
/// v_pq = I1(p) - I1(q) when both lie in the target footprint, else 0.
struct PoissonSystem {
  std::vector<Pixel> unknowns;
  Grid<int> index;
  /// CSR off-diagonal structure (coefficient -1 each).
  std::vector<int> row_start;
  std::vector<int> cols;
  std::vector<double> diagonal;
  /// Right-hand side per channel.
  std::array<std::vector<double>, 3> rhs;
};

inline PoissonSystem build_poisson_system(const AlignedPair& pair, const Labeling& labeling, const Image& naive) {
  const OverlapRegion& region = pair.region;
  const Size canvas = region.canvas;
  auto covered = [&](Pixel p) { return pair.reference_mask[p] != 0 || pair.target_mask[p] != 0; };
  auto in_omega = [&](Pixel p) {
    if (region.target_only[p]) return true;
    return region.overlap[p] != 0 && labeling[p] == kTarget;
  };

  PoissonSystem sys;
  sys.index = Grid<int>(canvas, -1);
  for (int y = 0; y < canvas.height; ++y) {
    for (int x = 0; x < canvas.width; ++x) {
      if (in_omega({x, y})) {
        sys.index(x, y) = static_cast<int>(sys.unknowns.size());
        sys.unknowns.push_back({x, y});
      }
    }
  }

  // Components with no fixed neighbor would leave the system singular; keep
  // their target values by dropping them from the unknowns.
  {
    std::vector<int> comp(sys.unknowns.size(), -1);
    std::vector<std::uint8_t> anchored;
    int ncomp = 0;
    for (std::size_t s = 0; s < sys.unknowns.size(); ++s) {
      if (comp[s] >= 0) continue;
      bool has_boundary = false;
      std::vector<std::size_t> stack{s};
      comp[s] = ncomp;
      while (!stack.empty()) {
        const Pixel p = sys.unknowns[stack.back()];
        stack.pop_back();
        for (const Pixel& d : kNeighbors4) {
          const Pixel q{p.x + d.x, p.y + d.y};
          if (!canvas.contains(q) || !covered(q)) continue;
          const int j = sys.index[q];
          if (j < 0) {
            has_boundary = true;
          } else if (comp[static_cast<std::size_t>(j)] < 0) {
            comp[static_cast<std::size_t>(j)] = ncomp;
            stack.push_back(static_cast<std::size_t>(j));
          }
        }
      }
      anchored.push_back(has_boundary ? 1 : 0);
      ++ncomp;
    }
    std::vector<Pixel> kept;
    Grid<int> index(canvas, -1);
    for (std::size_t s = 0; s < sys.unknowns.size(); ++s) {
      if (!anchored[static_cast<std::size_t>(comp[s])]) continue;
      index[sys.unknowns[s]] = static_cast<int>(kept.size());
      kept.push_back(sys.unknowns[s]);
    }
    sys.unknowns = std::move(kept);
    sys.index = std::move(index);
  }

  const std::size_t n = sys.unknowns.size();
  sys.row_start.reserve(n + 1);
  sys.diagonal.assign(n, 0.0);
  for (auto& b : sys.rhs) b.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    sys.row_start.push_back(static_cast<int>(sys.cols.size()));
    const Pixel p = sys.unknowns[i];
    for (const Pixel& d : kNeighbors4) {
      const Pixel q{p.x + d.x, p.y + d.y};
      if (!canvas.contains(q) || !covered(q)) continue;
      sys.diagonal[i] += 1.0;
      const int j = sys.index[q];
      const bool guided = pair.target_mask[p] != 0 && pair.target_mask[q] != 0;
      for (int c = 0; c < 3; ++c) {
        double b = guided ? pair.target.at(p.x, p.y, c) - pair.target.at(q.x, q.y, c) : 0.0;
        if (j < 0) b += naive.at(q.x, q.y, c);
        sys.rhs[static_cast<std::size_t>(c)][i] += b;
      }
      if (j >= 0) sys.cols.push_back(j);
    }
  }
  sys.row_start.push_back(static_cast<int>(sys.cols.size()));
  return sys;
}

inline void apply_poisson(const PoissonSystem& sys, const std::vector<double>& x, std::vector<double>& y) {
  const std::size_t n = sys.unknowns.size();
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = sys.diagonal[i] * x[i];
    for (int k = sys.row_start[i]; k < sys.row_start[i + 1]; ++k) v -= x[static_cast<std::size_t>(sys.cols[static_cast<std::size_t>(k)])];
    y[i] = v;
  }
}

/// Relative residual ||b - A x|| / ||b||, or the absolute residual when b = 0.
inline double poisson_residual(const PoissonSystem& sys, const std::vector<double>& x, const std::vector<double>& b) {
  std::vector<double> ax;
  apply_poisson(sys, x, ax);
  double rr = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    rr += (b[i] - ax[i]) * (b[i] - ax[i]);
    bb += b[i] * b[i];
  }
  return bb > 0.0 ? std::sqrt(rr / bb) : std::sqrt(rr);
}

/// Jacobi-preconditioned conjugate gradient from the initial guess in `x`.
/// Returns false when the relative residual does not reach `tolerance`
/// within `max_iterations`.
inline bool solve_poisson_cg(const PoissonSystem& sys, const std::vector<double>& b, std::vector<double>& x,
                             double tolerance, std::size_t max_iterations) {
  const std::size_t n = b.size();
  double bnorm = 0.0;
  for (double v : b) bnorm += v * v;
  bnorm = std::sqrt(bnorm);
  const double target = tolerance * (bnorm > 0.0 ? bnorm : 1.0);

  std::vector<double> r(n), z(n), p(n), ap(n);
  apply_poisson(sys, x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  auto norm = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    return std::sqrt(s);
  };
  if (norm(r) <= target) return true;
  for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / sys.diagonal[i];
  p = z;
  double rz = 0.0;
  for (std::size_t i = 0; i < n; ++i) rz += r[i] * z[i];

  for (std::size_t it = 0; it < max_iterations; ++it) {
    apply_poisson(sys, p, ap);
    double pap = 0.0;
    for (std::size_t i = 0; i < n; ++i) pap += p[i] * ap[i];
    if (!(pap > 0.0)) return false;
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    if (norm(r) <= target) {
      // Confirm against the true residual; recurrences drift.
      apply_poisson(sys, x, ap);
      for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
      if (norm(r) <= target) return true;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / sys.diagonal[i];
    double rz_next = 0.0;
    for (std::size_t i = 0; i < n; ++i) rz_next += r[i] * z[i];
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return false;
}

/// Gradient-domain fusion: target-side pixels keep the target's gradients
/// and are anchored to reference-side values along the seam. Channels are
/// clamped to [0,1] after the solve.
inline Composite poisson_fuse(const AlignedPair& pair, const Labeling& labeling, double tolerance = 1e-6) {
  Composite naive = composite_naive(pair, labeling);
  const PoissonSystem sys = build_poisson_system(pair, labeling, naive.image);
  Composite out = naive;
  const std::size_t n = sys.unknowns.size();
  for (int c = 0; c < 3; ++c) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = pair.target.at(sys.unknowns[i].x, sys.unknowns[i].y, c);
    if (!solve_poisson_cg(sys, sys.rhs[static_cast<std::size_t>(c)], x, tolerance, std::max<std::size_t>(10 * n, 10))) {
      throw Error(ErrorCode::SolverDivergence, "conjugate gradient did not reach the residual tolerance");
    }
    for (std::size_t i = 0; i < n; ++i) {
      out.image.at(sys.unknowns[i].x, sys.unknowns[i].y, c) = std::clamp(x[i], 0.0, 1.0);
    }
  }
  for (const Pixel& p : sys.unknowns) out.provenance[p] = Provenance::Blended;
  return out;
}

}  // namespace cfseam

#endif  // CFSEAM_BLEND_HPP
