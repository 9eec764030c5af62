#ifndef CFSEAM_EVALUATION_HPP
#define CFSEAM_EVALUATION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

#include "cfseam/core.hpp"
#include "cfseam/graphcut.hpp"

namespace cfseam {

inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

/// Per-crossing scores of one seam, indexed in seam order.
struct EvaluationSignal {
  std::vector<double> patch_raw;
  std::vector<double> point_raw;
  std::vector<double> patch_smooth;
  std::vector<double> point_smooth;
  std::vector<double> combined;

  std::size_t size() const { return combined.size(); }
};

namespace detail {

/// Collects a square patch around `center`, replicating border pixels.
inline void gather_patch(const Grid<double>& plane, Pixel center, int patch_size, std::vector<double>& out) {
  const int half = patch_size / 2;
  out.clear();
  out.reserve(static_cast<std::size_t>(patch_size) * static_cast<std::size_t>(patch_size));
  for (int dy = -half; dy <= half; ++dy) {
    const int y = std::clamp(center.y + dy, 0, plane.height() - 1);
    for (int dx = -half; dx <= half; ++dx) {
      const int x = std::clamp(center.x + dx, 0, plane.width() - 1);
      out.push_back(plane(x, y));
    }
  }
}

struct PatchMoments {
  double mean_a = 0.0;
  double mean_b = 0.0;
  double var_a = 0.0;
  double var_b = 0.0;
  double cov = 0.0;
};

inline PatchMoments moments(std::span<const double> a, std::span<const double> b) {
  PatchMoments m;
  const double n = static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    m.mean_a += a[i];
    m.mean_b += b[i];
  }
  m.mean_a /= n;
  m.mean_b /= n;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - m.mean_a;
    const double db = b[i] - m.mean_b;
    m.var_a += da * da;
    m.var_b += db * db;
    m.cov += da * db;
  }
  m.var_a /= n;
  m.var_b /= n;
  m.cov /= n;
  return m;
}

}  // namespace detail

/// SSIM between the luma patches of two planes centered at `center`,
/// uniform weights, population statistics.
inline double ssim_patch(const Grid<double>& luma0, const Grid<double>& luma1, Pixel center, int patch_size) {
  std::vector<double> a;
  std::vector<double> b;
  detail::gather_patch(luma0, center, patch_size, a);
  detail::gather_patch(luma1, center, patch_size, b);
  const detail::PatchMoments m = detail::moments(a, b);
  const double num = (2.0 * m.mean_a * m.mean_b + kSsimC1) * (2.0 * m.cov + kSsimC2);
  const double den = (m.mean_a * m.mean_a + m.mean_b * m.mean_b + kSsimC1) * (m.var_a + m.var_b + kSsimC2);
  return num / den;
}

inline double ssim_patch(const Image& i0, const Image& i1, Pixel center, int patch_size) {
  return ssim_patch(luma_plane(i0), luma_plane(i1), center, patch_size);
}

/// (1 - SSIM) / 2 at each crossing's reference-side pixel.
inline std::vector<double> patch_eval(const Seam& seam, const Grid<double>& luma0, const Grid<double>& luma1,
                                      int patch_size) {
  std::vector<double> out;
  out.reserve(seam.size());
  for (const Crossing& c : seam.crossings) {
    const double s = ssim_patch(luma0, luma1, c.p, patch_size);
    out.push_back(std::clamp((1.0 - s) / 2.0, 0.0, 1.0));
  }
  return out;
}

inline std::vector<double> patch_eval(const Seam& seam, const Image& i0, const Image& i1, const StitchConfig& cfg) {
  return patch_eval(seam, luma_plane(i0), luma_plane(i1), cfg.patch_size);
}

/// Mean color difference of the two pixels straddling each crossing.
inline std::vector<double> point_eval(const Seam& seam, const Image& i0, const Image& i1) {
  std::vector<double> out;
  out.reserve(seam.size());
  for (const Crossing& c : seam.crossings) {
    out.push_back(0.5 * (color_distance(i0.color(c.p), i1.color(c.p)) + color_distance(i0.color(c.q), i1.color(c.q))));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Smoothing
// ---------------------------------------------------------------------------

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

inline double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

}  // namespace detail

/// Orthonormal Haar denoising with the universal soft threshold.
///
/// Odd-length levels are extended by repeating the last sample; the extra
/// sample is dropped again on reconstruction.
inline std::vector<double> haar_denoise(std::span<const double> signal, int max_depth = 3) {
  const std::size_t n = signal.size();
  std::vector<double> out(signal.begin(), signal.end());
  if (n < 2) return out;
  const int depth = std::min(max_depth, static_cast<int>(std::floor(std::log2(static_cast<double>(n)))));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

  std::vector<std::vector<double>> details;
  std::vector<std::size_t> lengths;
  std::vector<double> approx = out;
  for (int level = 0; level < depth; ++level) {
    lengths.push_back(approx.size());
    if (approx.size() % 2 == 1) approx.push_back(approx.back());
    std::vector<double> a(approx.size() / 2);
    std::vector<double> d(approx.size() / 2);
    for (std::size_t k = 0; k < a.size(); ++k) {
      a[k] = (approx[2 * k] + approx[2 * k + 1]) * inv_sqrt2;
      d[k] = (approx[2 * k] - approx[2 * k + 1]) * inv_sqrt2;
    }
    details.push_back(std::move(d));
    approx = std::move(a);
  }

  std::vector<double> finest_abs(details.front().size());
  std::transform(details.front().begin(), details.front().end(), finest_abs.begin(), [](double v) { return std::abs(v); });
  const double sigma = detail::median(std::move(finest_abs)) / 0.6745;
  const double tau = sigma * std::sqrt(2.0 * std::log(static_cast<double>(n)));
  if (tau > 0.0) {
    for (auto& d : details) {
      for (double& v : d) v = detail::soft_threshold(v, tau);
    }
  }

  for (int level = depth - 1; level >= 0; --level) {
    const auto& d = details[static_cast<std::size_t>(level)];
    std::vector<double> up(approx.size() * 2);
    for (std::size_t k = 0; k < approx.size(); ++k) {
      up[2 * k] = (approx[k] + d[k]) * inv_sqrt2;
      up[2 * k + 1] = (approx[k] - d[k]) * inv_sqrt2;
    }
    up.resize(lengths[static_cast<std::size_t>(level)]);
    approx = std::move(up);
  }
  return approx;
}

/// Centered moving average, replicated ends.
inline std::vector<double> moving_average(std::span<const double> signal, int window = 9) {
  const int n = static_cast<int>(signal.size());
  const int half = window / 2;
  std::vector<double> out(signal.size());
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int k = -half; k <= half; ++k) sum += signal[static_cast<std::size_t>(std::clamp(i + k, 0, n - 1))];
    out[static_cast<std::size_t>(i)] = sum / static_cast<double>(2 * half + 1);
  }
  return out;
}

inline std::vector<double> smooth_signal(std::span<const double> signal, Smoothing method) {
  std::vector<double> out;
  switch (method) {
    case Smoothing::Wavelet: out = haar_denoise(signal); break;
    case Smoothing::MovingAverage: out = moving_average(signal); break;
    case Smoothing::None: return {signal.begin(), signal.end()};
  }
  for (double& v : out) v = std::max(v, 0.0);
  return out;
}

inline std::vector<double> combine(std::span<const double> patch, std::span<const double> point, double lambda) {
  if (patch.size() != point.size()) throw Error(ErrorCode::LengthMismatch, "patch and point signals differ in length");
  std::vector<double> out(patch.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = lambda * patch[i] * point[i];
  return out;
}

/// Luma planes cached for repeated evaluation of one pair.
struct EvaluationContext {
  const Image& reference;
  const Image& target;
  Grid<double> luma0;
  Grid<double> luma1;

  EvaluationContext(const Image& i0, const Image& i1)
      : reference(i0), target(i1), luma0(luma_plane(i0)), luma1(luma_plane(i1)) {}
};

/// Patch and point scores, each smoothed along the seam, then combined.
inline EvaluationSignal evaluate_seam(const Seam& seam, const EvaluationContext& ctx, const StitchConfig& cfg) {
  EvaluationSignal s;
  s.patch_raw = patch_eval(seam, ctx.luma0, ctx.luma1, cfg.patch_size);
  s.point_raw = point_eval(seam, ctx.reference, ctx.target);
  s.patch_smooth = smooth_signal(s.patch_raw, cfg.smoothing);
  s.point_smooth = smooth_signal(s.point_raw, cfg.smoothing);
  s.combined = combine(s.patch_smooth, s.point_smooth, cfg.lambda);
  return s;
}

inline EvaluationSignal evaluate_seam(const Seam& seam, const Image& i0, const Image& i1, const StitchConfig& cfg) {
  return evaluate_seam(seam, EvaluationContext(i0, i1), cfg);
}

/// CSV with columns index, patch_raw, point_raw, patch_smooth, point_smooth, combined.
inline void write_signal_csv(std::ostream& os, const EvaluationSignal& s) {
  os << "index,patch_raw,point_raw,patch_smooth,point_smooth,combined\n";
  const auto old = os.precision(17);
  for (std::size_t i = 0; i < s.size(); ++i) {
    os << i << ',' << s.patch_raw[i] << ',' << s.point_raw[i] << ',' << s.patch_smooth[i] << ',' << s.point_smooth[i]
       << ',' << s.combined[i] << '\n';
  }
  os.precision(old);
}

}  // namespace cfseam

#endif  // CFSEAM_EVALUATION_HPP
