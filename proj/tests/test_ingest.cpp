#include <gtest/gtest.h>

#include <png.h>
#include <jpeglib.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <vector>

#include "support.hpp"

namespace cfseam {
namespace {

void write_png16(const std::filesystem::path& path, int w, int h, const std::vector<std::uint16_t>& rgb) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  ASSERT_NE(fp, nullptr);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  png_init_io(png, fp);
  png_set_IHDR(png, info, w, h, 16, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_byte> row(static_cast<std::size_t>(w) * 6);
  for (int y = 0; y < h; ++y) {
    for (int i = 0; i < w * 3; ++i) {
      const std::uint16_t v = rgb[static_cast<std::size_t>(y * w * 3 + i)];
      row[static_cast<std::size_t>(2 * i)] = static_cast<png_byte>(v >> 8);
      row[static_cast<std::size_t>(2 * i + 1)] = static_cast<png_byte>(v & 0xFF);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

void write_gray_jpeg(const std::filesystem::path& path, int w, int h, std::uint8_t value) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  ASSERT_NE(fp, nullptr);
  jpeg_compress_struct cinfo;
  jpeg_error_mgr jerr;
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_compress(&cinfo);
  jpeg_stdio_dest(&cinfo, fp);
  cinfo.image_width = static_cast<JDIMENSION>(w);
  cinfo.image_height = static_cast<JDIMENSION>(h);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, 95, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  std::vector<JSAMPLE> row(static_cast<std::size_t>(w) * 3, value);
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW r = row.data();
    jpeg_write_scanlines(&cinfo, &r, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::fclose(fp);
}

/// 8-bit-representable random image.
Image quantized_image(int w, int h, std::mt19937_64& rng) {
  Image img(w, h);
  for (double& v : img.data()) v = static_cast<double>(rng() % 256) / 255.0;
  return img;
}

TEST(Png, WhiteLoadsAsOnes) {
  const auto dir = test::scratch_dir("png_white");
  save_image(Image(2, 2, {1, 1, 1}), dir / "w.png");
  const Image img = load_image(dir / "w.png");
  ASSERT_EQ(img.size(), (Size{2, 2}));
  for (double v : img.data()) EXPECT_EQ(v, 1.0);
}

TEST(Png, RoundTripIsLossless) {
  std::mt19937_64 rng(51);
  const auto dir = test::scratch_dir("png_roundtrip");
  const Image img = quantized_image(13, 7, rng);
  save_image(img, dir / "a.png");
  EXPECT_EQ(load_image(dir / "a.png").data(), img.data());
}

TEST(Png, SixteenBitDividesBy65535) {
  const auto dir = test::scratch_dir("png16");
  const std::vector<std::uint16_t> v{65535, 32768, 1, 0, 1000, 40000};
  write_png16(dir / "a.png", 2, 1, v);
  const Image img = load_image(dir / "a.png");
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(img.data()[i], v[i] / 65535.0);
}

TEST(Jpeg, GrayLoadsApproximately) {
  const auto dir = test::scratch_dir("jpeg");
  write_gray_jpeg(dir / "g.jpg", 16, 16, 128);
  const Image img = load_image(dir / "g.jpg");
  ASSERT_EQ(img.size(), (Size{16, 16}));
  for (double v : img.data()) EXPECT_NEAR(v, 128.0 / 255.0, 3.0 / 255.0);
}

TEST(Load, MissingFileIsIoError) {
  try {
    load_image("/nonexistent/dir/none.png");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
    EXPECT_NE(std::string(e.what()).find("none.png"), std::string::npos);
  }
}

TEST(Load, GarbageIsDecodeError) {
  const auto dir = test::scratch_dir("garbage");
  std::ofstream(dir / "x.png") << "definitely not an image";
  try {
    load_image(dir / "x.png");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DecodeError);
  }
}

TEST(Load, TruncatedPngIsDecodeError) {
  std::mt19937_64 rng(52);
  const auto dir = test::scratch_dir("truncated");
  save_image(quantized_image(32, 32, rng), dir / "a.png");
  const std::string bytes = test::slurp(dir / "a.png");
  std::ofstream(dir / "b.png", std::ios::binary) << bytes.substr(0, bytes.size() / 2);
  EXPECT_THROW(load_image(dir / "b.png"), Error);
}

TEST(Mask, RoundTrip) {
  const auto dir = test::scratch_dir("mask");
  Mask m(5, 4);
  m(1, 2) = 1;
  m(4, 0) = 1;
  save_mask(m, dir / "m.png");
  EXPECT_EQ(load_mask(dir / "m.png"), m);
}

TEST(Homography, SingularRejected) {
  const std::array<double, 9> v{1, 2, 3, 2, 4, 6, 0, 0, 1};
  try {
    Homography::from_values(v);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularHomography);
  }
  const std::array<double, 9> zero{};
  EXPECT_THROW(Homography::from_values(zero), Error);
}

TEST(Homography, LoadsJsonAndText) {
  const auto dir = test::scratch_dir("hom");
  std::ofstream(dir / "a.json") << "[[1, 0, 5], [0, 1, -2], [0, 0, 1]]";
  std::ofstream(dir / "b.txt") << "1 0 5\n0 1 -2\n0 0 1\n";
  std::ofstream(dir / "c.txt") << "1 0 5 0 1";
  const Homography a = load_homography(dir / "a.json");
  const Homography b = load_homography(dir / "b.txt");
  EXPECT_EQ(a.matrix(), b.matrix());
  EXPECT_EQ(a.matrix()(0, 2), 5.0);
  EXPECT_EQ(a.matrix()(1, 2), -2.0);
  try {
    load_homography(dir / "c.txt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FormatError);
  }
}

TEST(Warp, IdentityReproducesInput) {
  std::mt19937_64 rng(53);
  const Image img = test::random_image(9, 6, rng);
  const WarpResult w = warp_target(img, Homography(), img.size());
  for (std::size_t i = 0; i < img.data().size(); ++i) EXPECT_NEAR(w.image.data()[i], img.data()[i], 1e-15);
  for (std::uint8_t v : w.mask.data()) EXPECT_EQ(v, 1);
}

TEST(Warp, TranslationShiftsConstantImage) {
  const Image img(6, 4, {0.3, 0.6, 0.9});
  const WarpResult w = warp_target(img, Homography::translation(3, 0), {12, 4});
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 12; ++x) {
      const bool inside = x >= 3 && x < 9;
      EXPECT_EQ(w.mask(x, y), inside ? 1 : 0);
      if (inside) {
        EXPECT_NEAR(w.image.at(x, y, 1), 0.6, 1e-15);
      }
    }
  }
}

TEST(Warp, AffineMatchesDirectResampler) {
  std::mt19937_64 rng(54);
  for (int trial = 0; trial < 5; ++trial) {
    const int sw = 17, sh = 13;
    Image src(sw, sh);
    for (int y = 0; y < sh; ++y) {
      for (int x = 0; x < sw; ++x) {
        for (int c = 0; c < 3; ++c) src.at(x, y, c) = 0.03 * x + 0.05 * y + 0.1 * c;
      }
    }
    const double th = test::uniform(rng, -0.4, 0.4);
    const double s = test::uniform(rng, 0.8, 1.3);
    const double a = s * std::cos(th), b = -s * std::sin(th), tx = test::uniform(rng, 3, 8);
    const double c = s * std::sin(th) + test::uniform(rng, -0.1, 0.1), d = s * std::cos(th), ty = test::uniform(rng, 3, 8);
    const std::array<double, 9> m{a, b, tx, c, d, ty, 0, 0, 1};
    const Size canvas{30, 30};
    const WarpResult w = warp_target(src, Homography::from_values(m), canvas);
    const double det = a * d - b * c;
    for (int y = 0; y < canvas.height; ++y) {
      for (int x = 0; x < canvas.width; ++x) {
        const double sx = (d * (x - tx) - b * (y - ty)) / det;
        const double sy = (-c * (x - tx) + a * (y - ty)) / det;
        const bool inside = sx >= -1e-9 && sy >= -1e-9 && sx <= sw - 1 + 1e-9 && sy <= sh - 1 + 1e-9;
        ASSERT_EQ(w.mask(x, y) != 0, inside) << x << "," << y;
        if (!inside) continue;
        const double cx = std::clamp(sx, 0.0, sw - 1.0), cy = std::clamp(sy, 0.0, sh - 1.0);
        const int x0 = static_cast<int>(cx), y0 = static_cast<int>(cy);
        const int x1 = std::min(x0 + 1, sw - 1), y1 = std::min(y0 + 1, sh - 1);
        const double fx = cx - x0, fy = cy - y0;
        for (int ch = 0; ch < 3; ++ch) {
          const double v = (1 - fx) * (1 - fy) * src.at(x0, y0, ch) + fx * (1 - fy) * src.at(x1, y0, ch) +
                           (1 - fx) * fy * src.at(x0, y1, ch) + fx * fy * src.at(x1, y1, ch);
          EXPECT_NEAR(w.image.at(x, y, ch), v, 1e-9);
        }
      }
    }
  }
}

TEST(Assemble, CanvasCoversBothFootprints) {
  std::mt19937_64 rng(55);
  const Image ref = test::random_image(10, 8, rng);
  const Image tgt = test::random_image(10, 8, rng);
  const AlignedPair pair = assemble_pair(ref, tgt, Homography::translation(6, -2));
  EXPECT_EQ(pair.canvas(), (Size{16, 10}));
  EXPECT_EQ(pair.reference.color({0, 2}), ref.color({0, 0}));
  EXPECT_NEAR(pair.target.at(6, 0, 0), tgt.at(0, 0, 0), 1e-15);
  EXPECT_EQ(pair.region.size(), 4u * 6u);
}

TEST(Assemble, NoHomographyMeansIdentity) {
  std::mt19937_64 rng(56);
  const Image ref = test::random_image(7, 5, rng);
  const AlignedPair pair = assemble_pair(ref, ref, std::nullopt);
  EXPECT_EQ(pair.canvas(), (Size{7, 5}));
  EXPECT_EQ(pair.region.size(), 35u);
}

TEST(Overlay, HotRampEndpoints) {
  EXPECT_EQ(hot_color(0.0), (Color{0, 0, 0}));
  EXPECT_EQ(hot_color(1.0), (Color{1, 1, 1}));
  const Color mid = hot_color(0.5);
  EXPECT_EQ(mid[0], 1.0);
  EXPECT_EQ(mid[2], 0.0);
}

TEST(Overlay, PaintsSeamPixelsByValue) {
  const Image base(6, 3, {0.5, 0.5, 0.5});
  Seam s;
  for (int y = 0; y < 3; ++y) s.crossings.push_back({{2, y}, {3, y}, 0});
  const std::vector<double> vals{0.0, 1.0, 2.0};
  const Image out = render_overlay(base, s, vals);
  EXPECT_EQ(out.color({2, 0}), hot_color(0.0));
  EXPECT_EQ(out.color({2, 1}), hot_color(0.5));
  EXPECT_EQ(out.color({2, 2}), hot_color(1.0));
  EXPECT_EQ(out.color({3, 1}), base.color({3, 1}));
}

TEST(Labeling, RoundTrip) {
  std::mt19937_64 rng(57);
  const auto dir = test::scratch_dir("labeling");
  const OverlapRegion r = compute_overlap(test::column_mask(20, 6, 0, 14), test::column_mask(20, 6, 5, 20));
  const Labeling l = test::labeling_where(r, [&](Pixel) { return rng() % 2 == 0; });
  save_labeling(l, r.canvas, dir / "l.pgm", dir / "l.json");
  const LoadedLabeling loaded = load_labeling(dir / "l.pgm", dir / "l.json");
  EXPECT_EQ(loaded.labeling, l);
  EXPECT_EQ(loaded.canvas, r.canvas);
}

TEST(Labeling, BadPgmIsFormatError) {
  const auto dir = test::scratch_dir("labeling_bad");
  std::ofstream(dir / "l.json") << R"({"canvas":{"width":4,"height":4},"bbox":{"x":0,"y":0,"width":4,"height":4}})";
  std::ofstream(dir / "l.pgm") << "P2\n4 4\n255\n";
  try {
    load_labeling(dir / "l.pgm", dir / "l.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FormatError);
  }
}

}  // namespace
}  // namespace cfseam
