#ifndef CFSEAM_TESTS_SUPPORT_HPP
#define CFSEAM_TESTS_SUPPORT_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include "cfseam/cfseam.hpp"

namespace cfseam::test {

inline double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Image random_image(int w, int h, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  Image img(w, h);
  for (double& v : img.data()) v = uniform(rng, lo, hi);
  return img;
}

inline Grid<double> random_plane(int w, int h, std::mt19937_64& rng) {
  Grid<double> g(w, h);
  for (double& v : g.data()) v = uniform(rng);
  return g;
}

/// Mask set on columns [x0, x1).
inline Mask column_mask(int w, int h, int x0, int x1) {
  Mask m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = x0; x < x1; ++x) m(x, y) = 1;
  }
  return m;
}

/// Reference on columns [0, ref_end), target on [tgt_begin, w).
inline AlignedPair side_by_side(Image i0, Image i1, int ref_end, int tgt_begin) {
  const int w = i0.width();
  const int h = i0.height();
  return make_aligned_pair(std::move(i0), std::move(i1), column_mask(w, h, 0, ref_end), column_mask(w, h, tgt_begin, w));
}

/// Label 1 on overlap pixels satisfying `pred`.
template <typename Pred>
Labeling labeling_where(const OverlapRegion& region, Pred pred) {
  Labeling l(region.bbox);
  for (const Pixel& p : region.pixels) l[p] = pred(p) ? kTarget : kReference;
  return l;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("cfseam_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace cfseam::test

#endif  // CFSEAM_TESTS_SUPPORT_HPP
