#ifndef CFSEAM_CORE_HPP
#define CFSEAM_CORE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cfseam {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

enum class ErrorCode {
  IoError,
  DecodeError,
  DimensionMismatch,
  EmptyOverlap,
  SingularHomography,
  ConstraintConflict,
  EmptySeam,
  LengthMismatch,
  SolverDivergence,
  FormatError,
  InvalidSpec,
  InvalidConfig,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyOverlap: return "EmptyOverlap";
    case ErrorCode::SingularHomography: return "SingularHomography";
    case ErrorCode::ConstraintConflict: return "ConstraintConflict";
    case ErrorCode::EmptySeam: return "EmptySeam";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::SolverDivergence: return "SolverDivergence";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

struct Pixel {
  int x = 0;
  int y = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
  /// Row-major order: (row, column).
  friend std::strong_ordering operator<=>(const Pixel& a, const Pixel& b) {
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
};

struct Size {
  int width = 0;
  int height = 0;

  friend bool operator==(const Size&, const Size&) = default;
  std::size_t area() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  bool contains(Pixel p) const { return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height; }
};

struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  friend bool operator==(const Rect&, const Rect&) = default;
  bool empty() const { return width <= 0 || height <= 0; }
  std::size_t area() const { return empty() ? 0 : static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  bool contains(Pixel p) const { return p.x >= x && p.y >= y && p.x < x + width && p.y < y + height; }
  /// Linear index of `p` inside the rectangle; `p` must be contained.
  std::size_t index(Pixel p) const {
    return static_cast<std::size_t>(p.y - y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(p.x - x);
  }
};

inline constexpr std::array<Pixel, 4> kNeighbors4 = {Pixel{1, 0}, Pixel{-1, 0}, Pixel{0, 1}, Pixel{0, -1}};

// ---------------------------------------------------------------------------
// Rasters
// ---------------------------------------------------------------------------

/// Row-major single-channel raster.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : size_{width, height}, data_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), fill) {}
  explicit Grid(Size size, T fill = T{}) : Grid(size.width, size.height, fill) {}

  int width() const { return size_.width; }
  int height() const { return size_.height; }
  Size size() const { return size_; }
  bool contains(Pixel p) const { return size_.contains(p); }

  std::size_t index(Pixel p) const {
    return static_cast<std::size_t>(p.y) * static_cast<std::size_t>(size_.width) + static_cast<std::size_t>(p.x);
  }
  Pixel pixel(std::size_t i) const {
    return {static_cast<int>(i % static_cast<std::size_t>(size_.width)),
            static_cast<int>(i / static_cast<std::size_t>(size_.width))};
  }

  T& operator()(int x, int y) { return data_[index({x, y})]; }
  const T& operator()(int x, int y) const { return data_[index({x, y})]; }
  T& operator[](Pixel p) { return data_[index(p)]; }
  const T& operator[](Pixel p) const { return data_[index(p)]; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  Size size_;
  std::vector<T> data_;
};

using Mask = Grid<std::uint8_t>;

using Color = std::array<double, 3>;

/// Three-channel image, channels interleaved, values in [0,1].
class Image {
 public:
  static constexpr int kChannels = 3;

  Image() = default;
  Image(int width, int height, Color fill = {0.0, 0.0, 0.0})
      : size_{width, height}, data_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0) * kChannels) {
    for (std::size_t i = 0; i < data_.size(); i += kChannels) {
      std::copy(fill.begin(), fill.end(), data_.begin() + static_cast<std::ptrdiff_t>(i));
    }
  }
  explicit Image(Size size, Color fill = {0.0, 0.0, 0.0}) : Image(size.width, size.height, fill) {}

  int width() const { return size_.width; }
  int height() const { return size_.height; }
  Size size() const { return size_; }
  bool contains(Pixel p) const { return size_.contains(p); }

  double& at(int x, int y, int c) { return data_[offset(x, y) + static_cast<std::size_t>(c)]; }
  double at(int x, int y, int c) const { return data_[offset(x, y) + static_cast<std::size_t>(c)]; }

  Color color(Pixel p) const {
    const std::size_t o = offset(p.x, p.y);
    return {data_[o], data_[o + 1], data_[o + 2]};
  }
  void set(Pixel p, const Color& c) {
    const std::size_t o = offset(p.x, p.y);
    data_[o] = c[0];
    data_[o + 1] = c[1];
    data_[o + 2] = c[2];
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t offset(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(size_.width) + static_cast<std::size_t>(x)) * kChannels;
  }

  Size size_;
  std::vector<double> data_;
};

inline double color_distance(const Color& a, const Color& b) {
  const double d0 = a[0] - b[0];
  const double d1 = a[1] - b[1];
  const double d2 = a[2] - b[2];
  return std::sqrt(d0 * d0 + d1 * d1 + d2 * d2);
}

/// Rec. 601 luma.
inline double luma(const Color& c) { return 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2]; }

inline Grid<double> luma_plane(const Image& image) {
  Grid<double> out(image.size());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) out(x, y) = luma(image.color({x, y}));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Overlap
// ---------------------------------------------------------------------------

struct OverlapRegion {
  Size canvas;
  Mask overlap;
  Mask reference_only;
  Mask target_only;
  /// Bounding box of the overlap pixels.
  Rect bbox;
  /// Overlap pixels in row-major order.
  std::vector<Pixel> pixels;
  /// Canvas-sized map from pixel to its position in `pixels`, -1 outside the overlap.
  Grid<int> index;

  bool in_overlap(Pixel p) const { return canvas.contains(p) && overlap[p] != 0; }
  std::size_t size() const { return pixels.size(); }
};

inline OverlapRegion compute_overlap(const Mask& mask0, const Mask& mask1) {
  if (mask0.size() != mask1.size()) {
    throw Error(ErrorCode::DimensionMismatch, "masks differ in size");
  }
  OverlapRegion r;
  r.canvas = mask0.size();
  r.overlap = Mask(r.canvas);
  r.reference_only = Mask(r.canvas);
  r.target_only = Mask(r.canvas);
  r.index = Grid<int>(r.canvas, -1);

  int x0 = r.canvas.width, y0 = r.canvas.height, x1 = -1, y1 = -1;
  for (int y = 0; y < r.canvas.height; ++y) {
    for (int x = 0; x < r.canvas.width; ++x) {
      const bool a = mask0(x, y) != 0;
      const bool b = mask1(x, y) != 0;
      if (a && b) {
        r.overlap(x, y) = 1;
        r.index(x, y) = static_cast<int>(r.pixels.size());
        r.pixels.push_back({x, y});
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      } else if (a) {
        r.reference_only(x, y) = 1;
      } else if (b) {
        r.target_only(x, y) = 1;
      }
    }
  }
  if (r.pixels.empty()) throw Error(ErrorCode::EmptyOverlap, "the two footprints do not intersect");
  r.bbox = {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
  return r;
}

/// Two images on a shared canvas with their validity footprints.
struct AlignedPair {
  Image reference;
  Image target;
  Mask reference_mask;
  Mask target_mask;
  OverlapRegion region;

  Size canvas() const { return region.canvas; }
};

inline AlignedPair make_aligned_pair(Image reference, Image target, Mask reference_mask, Mask target_mask) {
  const Size s = reference.size();
  if (target.size() != s || reference_mask.size() != s || target_mask.size() != s) {
    throw Error(ErrorCode::DimensionMismatch, "images and masks must share one canvas");
  }
  AlignedPair pair{std::move(reference), std::move(target), std::move(reference_mask), std::move(target_mask), {}};
  pair.region = compute_overlap(pair.reference_mask, pair.target_mask);
  return pair;
}

// ---------------------------------------------------------------------------
// Difference map
// ---------------------------------------------------------------------------

/// Per-overlap-pixel nonnegative cost, stored densely over the overlap bounding box.
class DifferenceMap {
 public:
  DifferenceMap() = default;
  explicit DifferenceMap(const OverlapRegion& region)
      : box_(region.bbox), values_(region.bbox.area(), 0.0), present_(region.bbox.area(), 0) {
    for (const Pixel& p : region.pixels) present_[box_.index(p)] = 1;
  }

  const Rect& box() const { return box_; }
  bool present(Pixel p) const { return box_.contains(p) && present_[box_.index(p)] != 0; }
  double operator[](Pixel p) const { return values_[box_.index(p)]; }
  double& operator[](Pixel p) { return values_[box_.index(p)]; }

  const std::vector<double>& values() const { return values_; }

  friend bool operator==(const DifferenceMap&, const DifferenceMap&) = default;

 private:
  Rect box_;
  std::vector<double> values_;
  std::vector<std::uint8_t> present_;
};

inline DifferenceMap difference_map(const Image& i0, const Image& i1, const OverlapRegion& region) {
  if (i0.size() != region.canvas || i1.size() != region.canvas) {
    throw Error(ErrorCode::DimensionMismatch, "images do not match the overlap canvas");
  }
  DifferenceMap map(region);
  for (const Pixel& p : region.pixels) map[p] = color_distance(i0.color(p), i1.color(p));
  return map;
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class Smoothing { Wavelet, MovingAverage, None };

inline std::string_view to_string(Smoothing s) {
  switch (s) {
    case Smoothing::Wavelet: return "wavelet";
    case Smoothing::MovingAverage: return "moving-average";
    case Smoothing::None: return "none";
  }
  return "none";
}

inline Smoothing parse_smoothing(std::string_view s) {
  if (s == "wavelet") return Smoothing::Wavelet;
  if (s == "moving-average" || s == "movavg") return Smoothing::MovingAverage;
  if (s == "none") return Smoothing::None;
  throw Error(ErrorCode::InvalidConfig, "unknown smoothing method '" + std::string(s) + "'");
}

struct StitchConfig {
  int patch_size = 21;
  double lambda = 10.0;
  double sigma = 5.0;
  double epsilon = 0.12;
  int band_radius = 5;
  int max_iterations = 20;
  Smoothing smoothing = Smoothing::Wavelet;
  double poisson_tolerance = 1e-6;
  /// Reweight the running map (true) or always the initial color difference map.
  bool compounding = true;

  void validate() const {
    if (patch_size < 3 || patch_size % 2 == 0) {
      throw Error(ErrorCode::InvalidConfig, "patch_size must be odd and >= 3");
    }
    if (band_radius < 1) throw Error(ErrorCode::InvalidConfig, "band_radius must be >= 1");
    if (max_iterations < 1) throw Error(ErrorCode::InvalidConfig, "max_iterations must be >= 1");
    if (!(poisson_tolerance > 0.0)) throw Error(ErrorCode::InvalidConfig, "poisson_tolerance must be > 0");
    if (!std::isfinite(lambda) || !std::isfinite(sigma) || !std::isfinite(epsilon)) {
      throw Error(ErrorCode::InvalidConfig, "lambda, sigma and epsilon must be finite");
    }
  }
};

}  // namespace cfseam

#endif  // CFSEAM_CORE_HPP
