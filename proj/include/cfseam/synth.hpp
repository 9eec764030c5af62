#ifndef CFSEAM_SYNTH_HPP
#define CFSEAM_SYNTH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cfseam/core.hpp"

namespace cfseam {

enum class Texture { Gradient, Checker, Noise };

inline std::string_view to_string(Texture t) {
  switch (t) {
    case Texture::Gradient: return "gradient";
    case Texture::Checker: return "checker";
    case Texture::Noise: return "noise";
  }
  return "noise";
}

inline Texture parse_texture(std::string_view s) {
  if (s == "gradient") return Texture::Gradient;
  if (s == "checker") return Texture::Checker;
  if (s == "noise") return Texture::Noise;
  throw Error(ErrorCode::InvalidSpec, "unknown texture '" + std::string(s) + "'");
}

/// Layout: the reference covers columns [0, left + overlap_width), the target
/// covers [left, width), with `left = (width - overlap_width) / 2`. Inside the
/// overlap, rows [band_top, band_bottom) outside the corridor show the
/// texture shifted by `shift` columns in the target.
struct FixtureSpec {
  int width = 96;
  int height = 64;
  int overlap_width = 40;
  int shift = 4;
  Texture texture = Texture::Noise;
  /// First corridor column in canvas coordinates; -1 picks a quarter into the overlap.
  int corridor_column = -1;
  int corridor_width = 2;
  int band_top = 0;
  /// -1 means the full height.
  int band_bottom = -1;
  std::uint64_t seed = 1;

  int overlap_left() const { return (width - overlap_width) / 2; }
  int overlap_right() const { return overlap_left() + overlap_width; }  // exclusive
  int corridor() const { return corridor_column >= 0 ? corridor_column : overlap_left() + overlap_width / 4; }
  int band_end() const { return band_bottom >= 0 ? band_bottom : height; }
};

struct Fixture {
  FixtureSpec spec;
  AlignedPair pair;
  /// Pixels where the two images actually disagree.
  Mask misaligned;
  /// Overlap pixels that are guaranteed identical, spanning the full height.
  Mask corridor;
};

inline void validate(const FixtureSpec& s) {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidSpec, why); };
  if (s.width < 4 || s.height < 1) fail("canvas must be at least 4x1");
  if (s.overlap_width < 2 || s.overlap_width > s.width - 2) fail("overlap_width must lie in [2, width - 2]");
  if (std::abs(s.shift) > s.width) fail("shift larger than the canvas");
  if (s.corridor_width < 2) fail("corridor_width must be >= 2 for a zero-cost cut to exist");
  const int c = s.corridor();
  if (c < s.overlap_left() || c + s.corridor_width > s.overlap_right()) {
    fail("corridor columns [" + std::to_string(c) + ", " + std::to_string(c + s.corridor_width) +
         ") lie outside the overlap [" + std::to_string(s.overlap_left()) + ", " + std::to_string(s.overlap_right()) + ")");
  }
  if (s.band_top < 0 || s.band_end() > s.height || s.band_top > s.band_end()) fail("band rows out of range");
}

namespace detail {

/// Uniform [0,1) from the top 53 bits; independent of library distribution details.
inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double quantize(double v) {
  return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
}

/// Procedural texture over columns [x_begin, x_end) and all rows.
class TextureField {
 public:
  TextureField(const FixtureSpec& s, int x_begin, int x_end)
      : texture_(s.texture), width_(s.width), height_(s.height), x_begin_(x_begin), span_(x_end - x_begin) {
    std::mt19937_64 rng(s.seed);
    for (auto& c : palette_) {
      for (double& v : c) v = quantize(unit(rng));
    }
    phase_ = unit(rng);
    if (texture_ == Texture::Noise) {
      noise_.resize(static_cast<std::size_t>(span_) * static_cast<std::size_t>(height_) * 3);
      for (double& v : noise_) v = quantize(unit(rng));
    }
  }

  Color operator()(int x, int y) const {
    switch (texture_) {
      case Texture::Gradient: {
        const double u = static_cast<double>(x) / width_;
        const double v = static_cast<double>(y) / std::max(height_, 1);
        return {quantize(0.1 + 0.8 * u), quantize(0.5 + 0.4 * std::sin(6.2831853 * (v + phase_))),
                quantize(0.2 + 0.3 * u + 0.3 * v)};
      }
      case Texture::Checker: {
        const int parity = ((floor_div(x, kCell) + floor_div(y, kCell)) % 2 + 2) % 2;
        return palette_[static_cast<std::size_t>(parity)];
      }
      case Texture::Noise: {
        const std::size_t o = (static_cast<std::size_t>(y) * static_cast<std::size_t>(span_) +
                               static_cast<std::size_t>(x - x_begin_)) * 3;
        return {noise_[o], noise_[o + 1], noise_[o + 2]};
      }
    }
    return {0.0, 0.0, 0.0};
  }

 private:
  static constexpr int kCell = 8;
  static int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

  Texture texture_;
  int width_;
  int height_;
  int x_begin_;
  int span_;
  std::array<Color, 2> palette_{};
  double phase_ = 0.0;
  std::vector<double> noise_;
};

}  // namespace detail

inline Fixture make_fixture(const FixtureSpec& spec) {
  validate(spec);
  const int margin = std::abs(spec.shift);
  const detail::TextureField tex(spec, -margin, spec.width + margin);
  const Size canvas{spec.width, spec.height};
  const int left = spec.overlap_left();
  const int right = spec.overlap_right();
  const int c0 = spec.corridor();
  const int c1 = c0 + spec.corridor_width;

  Image ref(canvas), tgt(canvas);
  Mask ref_mask(canvas), tgt_mask(canvas), misaligned(canvas), corridor(canvas);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const Color base = tex(x, y);
      const bool in_ref = x < right;
      const bool in_tgt = x >= left;
      const bool in_corridor = x >= c0 && x < c1;
      const bool displaced = in_ref && in_tgt && !in_corridor && y >= spec.band_top && y < spec.band_end();
      if (in_ref) {
        ref.set({x, y}, base);
        ref_mask(x, y) = 1;
      }
      if (in_tgt) {
        const Color c = displaced ? tex(x - spec.shift, y) : base;
        tgt.set({x, y}, c);
        tgt_mask(x, y) = 1;
        if (displaced && c != base) misaligned(x, y) = 1;
      }
      if (in_corridor) corridor(x, y) = 1;
    }
  }
  return {spec, make_aligned_pair(std::move(ref), std::move(tgt), std::move(ref_mask), std::move(tgt_mask)),
          std::move(misaligned), std::move(corridor)};
}

/// Reference footprint cropped out of the canvas.
inline Image fixture_reference_crop(const Fixture& f) {
  Image out(f.spec.overlap_right(), f.spec.height);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) out.set({x, y}, f.pair.reference.color({x, y}));
  }
  return out;
}

/// Target footprint cropped out of the canvas; it sits at column `overlap_left()`.
inline Image fixture_target_crop(const Fixture& f) {
  const int left = f.spec.overlap_left();
  Image out(f.spec.width - left, f.spec.height);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) out.set({x, y}, f.pair.target.color({x + left, y}));
  }
  return out;
}

inline nlohmann::json to_json(const FixtureSpec& s) {
  return nlohmann::json{{"width", s.width},
                        {"height", s.height},
                        {"overlap_width", s.overlap_width},
                        {"shift", s.shift},
                        {"texture", std::string(to_string(s.texture))},
                        {"corridor_column", s.corridor()},
                        {"corridor_width", s.corridor_width},
                        {"band_top", s.band_top},
                        {"band_bottom", s.band_end()},
                        {"seed", s.seed}};
}

/// Missing keys keep their defaults.
inline FixtureSpec fixture_spec_from_json(const nlohmann::json& j) {
  FixtureSpec s;
  try {
    s.width = j.value("width", s.width);
    s.height = j.value("height", s.height);
    s.overlap_width = j.value("overlap_width", s.overlap_width);
    s.shift = j.value("shift", s.shift);
    if (j.contains("texture")) s.texture = parse_texture(j.at("texture").get<std::string>());
    s.corridor_column = j.value("corridor_column", s.corridor_column);
    s.corridor_width = j.value("corridor_width", s.corridor_width);
    s.band_top = j.value("band_top", s.band_top);
    s.band_bottom = j.value("band_bottom", s.band_bottom);
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, e.what());
  }
  return s;
}

}  // namespace cfseam

#endif  // CFSEAM_SYNTH_HPP
