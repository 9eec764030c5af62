#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "support.hpp"

namespace cfseam {
namespace {

double zncc_oracle(const Grid<double>& a, const Grid<double>& b, Pixel c, int patch) {
  const int half = patch / 2;
  std::vector<long double> u, v;
  for (int y = c.y - half; y <= c.y + half; ++y) {
    for (int x = c.x - half; x <= c.x + half; ++x) {
      const int cx = std::clamp(x, 0, a.width() - 1);
      const int cy = std::clamp(y, 0, a.height() - 1);
      u.push_back(a(cx, cy));
      v.push_back(b(cx, cy));
    }
  }
  long double mu = 0, mv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    mu += u[i];
    mv += v[i];
  }
  mu /= u.size();
  mv /= v.size();
  long double num = 0, du = 0, dv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    num += (u[i] - mu) * (v[i] - mv);
    du += (u[i] - mu) * (u[i] - mu);
    dv += (v[i] - mv) * (v[i] - mv);
  }
  return static_cast<double>(num / std::sqrt(du * dv));
}

Seam vertical_seam(int x, int h) {
  Seam s;
  for (int y = 0; y < h; ++y) s.crossings.push_back({{x, y}, {x + 1, y}, 0});
  return s;
}

TEST(Zncc, MatchesScalarOracle) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    const int w = 5 + static_cast<int>(rng() % 30);
    const int h = 5 + static_cast<int>(rng() % 30);
    const Grid<double> a = test::random_plane(w, h, rng);
    Grid<double> b = test::random_plane(w, h, rng);
    const double mix = test::uniform(rng, -1.0, 1.0);
    for (std::size_t i = 0; i < b.data().size(); ++i) b.data()[i] = mix * a.data()[i] + (1 - std::abs(mix)) * b.data()[i];
    const Pixel c{static_cast<int>(rng() % w), static_cast<int>(rng() % h)};
    const int patch = 3 + 2 * static_cast<int>(rng() % 11);
    EXPECT_NEAR(zncc_patch(a, b, c, patch), zncc_oracle(a, b, c, patch), 1e-10);
  }
}

TEST(Zncc, IdenticalGivesOneAndZeroQuality) {
  std::mt19937_64 rng(42);
  const Image img = test::random_image(30, 20, rng);
  const Seam s = vertical_seam(14, 20);
  EXPECT_NEAR(zncc_patch(luma_plane(img), luma_plane(img), {14, 10}, 21), 1.0, 1e-15);
  EXPECT_NEAR(zncc_quality(s, img, img, 21), 0.0, 1e-15);
}

TEST(Zncc, AntiCorrelatedGivesQualityOne) {
  std::mt19937_64 rng(43);
  const Image a = test::random_image(30, 20, rng);
  Image b = a;
  for (double& v : b.data()) v = 1.0 - v;
  EXPECT_NEAR(zncc_quality(vertical_seam(14, 20), a, b, 21), 1.0, 1e-12);
}

TEST(Zncc, FlatPatchConvention) {
  const Grid<double> flat(25, 25, 0.5);
  const Grid<double> other(25, 25, 0.25);
  std::mt19937_64 rng(44);
  const Grid<double> noise = test::random_plane(25, 25, rng);
  EXPECT_EQ(zncc_patch(flat, flat, {12, 12}, 21), 1.0);
  EXPECT_EQ(zncc_patch(flat, other, {12, 12}, 21), 0.0);
  EXPECT_EQ(zncc_patch(flat, noise, {12, 12}, 21), 0.0);
}

TEST(Zncc, SymmetricAndOffsetInvariant) {
  std::mt19937_64 rng(45);
  const Image a = test::random_image(30, 20, rng, 0.1, 0.7);
  const Image b = test::random_image(30, 20, rng, 0.1, 0.7);
  Image a2 = a, b2 = b;
  for (double& v : a2.data()) v += 0.2;
  for (double& v : b2.data()) v += 0.2;
  const Seam s = vertical_seam(12, 20);
  const double q = zncc_quality(s, a, b, 21);
  EXPECT_NEAR(zncc_quality(s, b, a, 21), q, 1e-15);
  EXPECT_NEAR(zncc_quality(s, a2, b2, 21), q, 1e-12);
  EXPECT_GE(q, 0.0);
  EXPECT_LE(q, 1.0);
}

TEST(Percentile, LinearInterpolation) {
  const std::vector<double> v{4.0, 1.0, 3.0, 2.0};
  EXPECT_DOUBLE_EQ(percentile(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(percentile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(percentile(v, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(percentile(v, 0.9), 3.7);
}

TEST(SeamReport, ZeroEvaluations) {
  std::mt19937_64 rng(46);
  const Image img = test::random_image(20, 10, rng);
  const Seam s = vertical_seam(9, 10);
  const SeamReport r = seam_report(s, evaluate_seam(s, img, img, StitchConfig{}), img, img, StitchConfig{});
  EXPECT_EQ(r.mean_combined, 0.0);
  EXPECT_EQ(r.max_combined, 0.0);
  EXPECT_NEAR(r.q_seam, 0.0, 1e-15);
  EXPECT_EQ(r.length, 10u);
}

TEST(SeamReport, SingleCrossing) {
  std::mt19937_64 rng(47);
  const Image a = test::random_image(20, 10, rng);
  const Image b = test::random_image(20, 10, rng);
  const Seam s{{Crossing{{4, 4}, {5, 4}, 0}}};
  const EvaluationSignal sig = evaluate_seam(s, a, b, StitchConfig{});
  const SeamReport r = seam_report(s, sig, a, b, StitchConfig{});
  EXPECT_EQ(r.mean_combined, sig.combined[0]);
  EXPECT_EQ(r.max_combined, sig.combined[0]);
  EXPECT_EQ(r.p90_combined, sig.combined[0]);
}

TEST(SeamReport, AggregatesMatchScalarLoop) {
  std::mt19937_64 rng(48);
  const Image a = test::random_image(30, 25, rng);
  const Image b = test::random_image(30, 25, rng);
  const OverlapRegion region = compute_overlap(Mask(30, 25, 1), Mask(30, 25, 1));
  const Seam s = extract_seam(test::labeling_where(region, [](Pixel p) { return p.x > 8 + p.y / 2; }), region);
  const StitchConfig cfg;
  const EvaluationSignal sig = evaluate_seam(s, a, b, cfg);
  const SeamReport r = seam_report(s, sig, a, b, cfg);
  double q = 0, mean = 0, mx = 0, pmax = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    q += (1.0 - zncc_oracle(luma_plane(a), luma_plane(b), s.crossings[i].p, cfg.patch_size)) / 2.0;
    mean += sig.combined[i];
    mx = std::max(mx, sig.combined[i]);
    pmax = std::max(pmax, sig.point_raw[i]);
  }
  const double n = static_cast<double>(s.size());
  EXPECT_NEAR(r.q_seam, q / n, 1e-10);
  EXPECT_NEAR(r.mean_combined, mean / n, 1e-12);
  EXPECT_EQ(r.max_combined, mx);
  EXPECT_EQ(r.max_point, pmax);
  const auto j = to_json(r);
  EXPECT_EQ(j.at("seam_length").get<std::size_t>(), s.size());
  EXPECT_EQ(j.at("evaluation").at("max").get<double>(), mx);
  std::ostringstream os;
  write_crossing_csv(os, r);
  const std::string csv = os.str();
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), s.size() + 1);
}

TEST(SeamReport, LengthMismatch) {
  std::mt19937_64 rng(49);
  const Image img = test::random_image(10, 10, rng);
  EvaluationSignal sig;
  sig.combined.resize(3);
  EXPECT_THROW(seam_report(vertical_seam(4, 10), sig, img, img, StitchConfig{}), Error);
}

}  // namespace
}  // namespace cfseam
