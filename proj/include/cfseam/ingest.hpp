#ifndef CFSEAM_INGEST_HPP
#define CFSEAM_INGEST_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <jpeglib.h>
#include <nlohmann/json.hpp>
#include <png.h>

#include "cfseam/core.hpp"
#include "cfseam/graphcut.hpp"

namespace cfseam {

// ---------------------------------------------------------------------------
// Raster files
// ---------------------------------------------------------------------------

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  return f;
}

struct RawRaster {
  int width = 0;
  int height = 0;
  int bit_depth = 8;          // 8 or 16
  std::vector<std::uint8_t> bytes;  // interleaved RGB, big-endian samples for 16-bit
};

// Returns an error message, empty on success. Kept free of objects with
// destructors between setjmp and the libpng calls.
inline const char* read_png_raw(std::FILE* fp, RawRaster& out) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return "cannot allocate PNG reader";
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return "cannot allocate PNG info";
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return "corrupt PNG stream";
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  const png_byte color_type = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.bit_depth = png_get_bit_depth(png, info) == 16 ? 16 : 8;
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  out.bytes.resize(rowbytes * static_cast<std::size_t>(out.height));
  std::vector<png_bytep> rows(static_cast<std::size_t>(out.height));
  for (int y = 0; y < out.height; ++y) rows[static_cast<std::size_t>(y)] = out.bytes.data() + rowbytes * static_cast<std::size_t>(y);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return nullptr;
}

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  std::longjmp(err->jump, 1);
}

inline const char* read_jpeg_raw(std::FILE* fp, RawRaster& out) {
  jpeg_decompress_struct cinfo;
  JpegError err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    return "corrupt JPEG stream";
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, fp);
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out.width = static_cast<int>(cinfo.output_width);
  out.height = static_cast<int>(cinfo.output_height);
  out.bit_depth = 8;
  const std::size_t stride = static_cast<std::size_t>(out.width) * 3;
  out.bytes.resize(stride * static_cast<std::size_t>(out.height));
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.bytes.data() + stride * cinfo.output_scanline;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return nullptr;
}

inline void write_png_raw(const std::filesystem::path& path, int width, int height, int channels,
                          std::span<const std::uint8_t> bytes) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(width);
  img.height = static_cast<png_uint_32>(height);
  img.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const FilePtr f = open_file(path, "wb");
  if (!png_image_write_to_stdio(&img, f.get(), 0, bytes.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "': " + msg);
  }
}

inline std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace detail

/// Loads a PNG or JPEG; samples are divided by 255 (8-bit) or 65535 (16-bit).
inline Image load_image(const std::filesystem::path& path) {
  const detail::FilePtr f = detail::open_file(path, "rb");
  std::array<unsigned char, 8> magic{};
  const std::size_t got = std::fread(magic.data(), 1, magic.size(), f.get());
  std::rewind(f.get());

  detail::RawRaster raw;
  const char* err = nullptr;
  if (got >= 8 && png_sig_cmp(magic.data(), 0, 8) == 0) {
    err = detail::read_png_raw(f.get(), raw);
  } else if (got >= 3 && magic[0] == 0xFF && magic[1] == 0xD8 && magic[2] == 0xFF) {
    err = detail::read_jpeg_raw(f.get(), raw);
  } else {
    throw Error(ErrorCode::DecodeError, "'" + path.string() + "' is neither PNG nor JPEG");
  }
  if (err) throw Error(ErrorCode::DecodeError, "'" + path.string() + "': " + err);

  Image img(raw.width, raw.height);
  auto& data = img.data();
  if (raw.bit_depth == 16) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      const unsigned v = (static_cast<unsigned>(raw.bytes[2 * i]) << 8) | raw.bytes[2 * i + 1];
      data[i] = static_cast<double>(v) / 65535.0;
    }
  } else {
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<double>(raw.bytes[i]) / 255.0;
  }
  return img;
}

/// Writes an 8-bit RGB PNG (values rounded to the nearest level).
inline void save_image(const Image& image, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes(image.data().size());
  std::transform(image.data().begin(), image.data().end(), bytes.begin(), detail::to_byte);
  detail::write_png_raw(path, image.width(), image.height(), 3, bytes);
}

/// Writes a mask as an 8-bit grayscale PNG (0 / 255).
inline void save_mask(const Mask& mask, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes(mask.data().size());
  std::transform(mask.data().begin(), mask.data().end(), bytes.begin(), [](std::uint8_t v) { return v ? 255 : 0; });
  detail::write_png_raw(path, mask.width(), mask.height(), 1, bytes);
}

/// Reads a mask image; a pixel is set when its luma exceeds one half.
inline Mask load_mask(const std::filesystem::path& path) {
  const Image img = load_image(path);
  Mask m(img.size());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) m(x, y) = luma(img.color({x, y})) > 0.5 ? 1 : 0;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Homography
// ---------------------------------------------------------------------------

/// Row-major 3x3 projective map from target pixel coordinates to canvas coordinates.
class Homography {
 public:
  Homography() : m_(Eigen::Matrix3d::Identity()) {}

  explicit Homography(const Eigen::Matrix3d& m) : m_(m) {
    const double norm = m.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) throw Error(ErrorCode::SingularHomography, "zero or non-finite matrix");
    if (std::abs((m / norm).determinant()) <= 1e-12) {
      throw Error(ErrorCode::SingularHomography, "matrix is not invertible");
    }
    inverse_ = m.inverse();
  }

  static Homography from_values(std::span<const double> v) {
    if (v.size() != 9) throw Error(ErrorCode::FormatError, "homography needs 9 values, got " + std::to_string(v.size()));
    Eigen::Matrix3d m;
    m << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
    return Homography(m);
  }

  static Homography translation(double dx, double dy) {
    const std::array<double, 9> v{1, 0, dx, 0, 1, dy, 0, 0, 1};
    return from_values(v);
  }

  const Eigen::Matrix3d& matrix() const { return m_; }
  const Eigen::Matrix3d& inverse() const { return inverse_; }

  /// Projects (x, y); nullopt when the point maps to or behind the line at infinity.
  static std::optional<std::array<double, 2>> project(const Eigen::Matrix3d& m, double x, double y) {
    const Eigen::Vector3d v = m * Eigen::Vector3d(x, y, 1.0);
    if (!(v.z() > 0.0)) return std::nullopt;
    return std::array<double, 2>{v.x() / v.z(), v.y() / v.z()};
  }

  Homography then(const Homography& next) const { return Homography(next.m_ * m_); }

 private:
  Eigen::Matrix3d m_;
  Eigen::Matrix3d inverse_ = Eigen::Matrix3d::Identity();
};

/// Reads a homography from a JSON array of 9 numbers or a whitespace-separated text file.
inline Homography load_homography(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<double> values;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    try {
      const auto j = nlohmann::json::parse(text);
      for (const auto& e : j.flatten()) values.push_back(e.get<double>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::FormatError, "'" + path.string() + "': " + e.what());
    }
  } else {
    std::istringstream ss(text);
    double v = 0.0;
    while (ss >> v) values.push_back(v);
    if (!ss.eof()) throw Error(ErrorCode::FormatError, "'" + path.string() + "' holds non-numeric tokens");
  }
  return Homography::from_values(values);
}

inline constexpr double kWarpEdgeTolerance = 1e-9;

/// Bilinear sample at a real position inside [0, w-1] x [0, h-1].
inline Color sample_bilinear(const Image& src, double sx, double sy) {
  sx = std::clamp(sx, 0.0, static_cast<double>(src.width() - 1));
  sy = std::clamp(sy, 0.0, static_cast<double>(src.height() - 1));
  const int x0 = static_cast<int>(std::floor(sx));
  const int y0 = static_cast<int>(std::floor(sy));
  const int x1 = std::min(x0 + 1, src.width() - 1);
  const int y1 = std::min(y0 + 1, src.height() - 1);
  const double fx = sx - x0;
  const double fy = sy - y0;
  Color out{};
  for (int c = 0; c < 3; ++c) {
    const double top = (1.0 - fx) * src.at(x0, y0, c) + fx * src.at(x1, y0, c);
    const double bottom = (1.0 - fx) * src.at(x0, y1, c) + fx * src.at(x1, y1, c);
    out[static_cast<std::size_t>(c)] = (1.0 - fy) * top + fy * bottom;
  }
  return out;
}

struct WarpResult {
  Image image;
  Mask mask;
};

/// Inverse-maps every canvas pixel into `target` and samples bilinearly;
/// pixels whose preimage falls outside the source rectangle stay masked out.
inline WarpResult warp_target(const Image& target, const Homography& h, Size canvas) {
  if (canvas.width < 1 || canvas.height < 1) throw Error(ErrorCode::DimensionMismatch, "canvas must be at least 1x1");
  WarpResult out{Image(canvas), Mask(canvas)};
  const double xmax = target.width() - 1;
  const double ymax = target.height() - 1;
  for (int y = 0; y < canvas.height; ++y) {
    for (int x = 0; x < canvas.width; ++x) {
      const auto src = Homography::project(h.inverse(), x, y);
      if (!src) continue;
      const auto [sx, sy] = *src;
      if (sx < -kWarpEdgeTolerance || sy < -kWarpEdgeTolerance || sx > xmax + kWarpEdgeTolerance ||
          sy > ymax + kWarpEdgeTolerance) {
        continue;
      }
      out.image.set({x, y}, sample_bilinear(target, sx, sy));
      out.mask(x, y) = 1;
    }
  }
  return out;
}

/// Largest canvas side accepted when assembling a pair.
inline constexpr int kMaxCanvasSide = 16384;

/// Places the reference at the canvas origin offset and warps the target
/// with `h` (identity when absent); the canvas is the bounding box of both
/// footprints.
inline AlignedPair assemble_pair(const Image& reference, const Image& target, const std::optional<Homography>& h) {
  const Homography hom = h.value_or(Homography());
  double minx = 0.0, miny = 0.0;
  double maxx = reference.width() - 1, maxy = reference.height() - 1;
  for (const auto& [cx, cy] : {std::array<double, 2>{0.0, 0.0},
                               std::array<double, 2>{static_cast<double>(target.width() - 1), 0.0},
                               std::array<double, 2>{0.0, static_cast<double>(target.height() - 1)},
                               std::array<double, 2>{static_cast<double>(target.width() - 1),
                                                     static_cast<double>(target.height() - 1)}}) {
    const auto p = Homography::project(hom.matrix(), cx, cy);
    if (!p) throw Error(ErrorCode::SingularHomography, "target corner maps beyond the horizon");
    minx = std::min(minx, (*p)[0]);
    miny = std::min(miny, (*p)[1]);
    maxx = std::max(maxx, (*p)[0]);
    maxy = std::max(maxy, (*p)[1]);
  }
  const double x0 = std::floor(minx + kWarpEdgeTolerance);
  const double y0 = std::floor(miny + kWarpEdgeTolerance);
  const double x1 = std::ceil(maxx - kWarpEdgeTolerance);
  const double y1 = std::ceil(maxy - kWarpEdgeTolerance);
  if (x1 - x0 + 1 > kMaxCanvasSide || y1 - y0 + 1 > kMaxCanvasSide) {
    throw Error(ErrorCode::SingularHomography, "warped canvas exceeds " + std::to_string(kMaxCanvasSide) + " pixels");
  }
  const Size canvas{static_cast<int>(x1 - x0 + 1), static_cast<int>(y1 - y0 + 1)};
  const int ox = static_cast<int>(-x0);
  const int oy = static_cast<int>(-y0);

  Image ref(canvas);
  Mask ref_mask(canvas);
  for (int y = 0; y < reference.height(); ++y) {
    for (int x = 0; x < reference.width(); ++x) {
      ref.set({x + ox, y + oy}, reference.color({x, y}));
      ref_mask(x + ox, y + oy) = 1;
    }
  }
  WarpResult warped = warp_target(target, hom.then(Homography::translation(ox, oy)), canvas);
  return make_aligned_pair(std::move(ref), std::move(warped.image), std::move(ref_mask), std::move(warped.mask));
}

// ---------------------------------------------------------------------------
// Seam overlay
// ---------------------------------------------------------------------------

/// Black-red-yellow-white ramp over t in [0,1].
inline Color hot_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return {std::clamp(3.0 * t, 0.0, 1.0), std::clamp(3.0 * t - 1.0, 0.0, 1.0), std::clamp(3.0 * t - 2.0, 0.0, 1.0)};
}

/// Paints each crossing's reference-side pixel with the hot color of its
/// value, normalized by the largest value on the seam.
inline Image render_overlay(const Image& image, const Seam& seam, std::span<const double> values) {
  if (values.size() != seam.size()) throw Error(ErrorCode::LengthMismatch, "one value per seam crossing required");
  Image out = image;
  double peak = 0.0;
  for (double v : values) peak = std::max(peak, v);
  for (std::size_t i = 0; i < seam.size(); ++i) {
    const double t = peak > 0.0 ? values[i] / peak : 0.0;
    out.set(seam.crossings[i].p, hot_color(t));
  }
  return out;
}

inline void save_overlay(const Image& image, const Seam& seam, std::span<const double> values,
                         const std::filesystem::path& path) {
  save_image(render_overlay(image, seam, values), path);
}

// ---------------------------------------------------------------------------
// Labeling interchange
// ---------------------------------------------------------------------------

/// Writes the labeling as a binary PGM over the overlap bounding box
/// (0 = reference, 255 = target) plus a JSON sidecar with the box and canvas.
inline void save_labeling(const Labeling& labeling, Size canvas, const std::filesystem::path& pgm,
                          const std::filesystem::path& sidecar) {
  const Rect& b = labeling.box();
  {
    std::ofstream out(pgm, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + pgm.string() + "'");
    out << "P5\n" << b.width << ' ' << b.height << "\n255\n";
    for (std::uint8_t l : labeling.labels()) out.put(static_cast<char>(l ? 255 : 0));
  }
  std::ofstream js(sidecar);
  if (!js) throw Error(ErrorCode::IoError, "cannot write '" + sidecar.string() + "'");
  const nlohmann::json j{{"canvas", {{"width", canvas.width}, {"height", canvas.height}}},
                         {"bbox", {{"x", b.x}, {"y", b.y}, {"width", b.width}, {"height", b.height}}}};
  js << j.dump(2) << '\n';
}

struct LoadedLabeling {
  Labeling labeling;
  Size canvas;
};

inline LoadedLabeling load_labeling(const std::filesystem::path& pgm, const std::filesystem::path& sidecar) {
  nlohmann::json j;
  {
    std::ifstream js(sidecar);
    if (!js) throw Error(ErrorCode::IoError, "cannot open '" + sidecar.string() + "'");
    try {
      js >> j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::FormatError, "'" + sidecar.string() + "': " + e.what());
    }
  }
  Rect box;
  Size canvas;
  try {
    box = {j.at("bbox").at("x").get<int>(), j.at("bbox").at("y").get<int>(), j.at("bbox").at("width").get<int>(),
           j.at("bbox").at("height").get<int>()};
    canvas = {j.at("canvas").at("width").get<int>(), j.at("canvas").at("height").get<int>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, "'" + sidecar.string() + "': " + e.what());
  }
  if (box.empty()) throw Error(ErrorCode::FormatError, "empty labeling box");

  std::ifstream in(pgm, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + pgm.string() + "'");
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  in.get();
  if (!in || magic != "P5" || maxval != 255) throw Error(ErrorCode::FormatError, "'" + pgm.string() + "' is not an 8-bit P5 PGM");
  if (w != box.width || h != box.height) throw Error(ErrorCode::FormatError, "PGM size disagrees with its sidecar box");
  Labeling labeling(box);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int v = in.get();
      if (v == EOF) throw Error(ErrorCode::FormatError, "'" + pgm.string() + "' is truncated");
      labeling[{box.x + x, box.y + y}] = v >= 128 ? kTarget : kReference;
    }
  }
  return {std::move(labeling), canvas};
}

}  // namespace cfseam

#endif  // CFSEAM_INGEST_HPP
