#pragma once

#include <png.h>

#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "artis/core.hpp"

namespace artis {

/// One grayscale frame; pixel values live in [0, 255] but are kept as floats
/// so resampled frames do not get re-quantized.
struct Frame {
  Matf pixels;
  int index = 0;

  int width() const { return pixels.cols(); }
  int height() const { return pixels.rows(); }
};

struct FrameSequence {
  std::vector<Frame> frames;
  int width = 0;
  int height = 0;
  std::string source_id;

  std::size_t size() const { return frames.size(); }
};

struct FeatureVectorSequence {
  std::vector<std::vector<float>> vectors;
  int dim = 0;
  std::string source_id;

  std::size_t size() const { return vectors.size(); }
};

enum class FrameFormat { image_dir, packed_binary };

inline float luma(double r, double g, double b) {
  return static_cast<float>(std::lround(0.299 * r + 0.587 * g + 0.114 * b));
}

// ---------------------------------------------------------------------------
// little-endian scalar I/O

inline void write_u32le(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t read_u32le(std::istream& is, const char* what) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw IoError(std::string("truncated input while reading ") + what);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

static_assert(std::numeric_limits<float>::is_iec559, "requires IEEE-754 float");

inline void write_f32le(std::ostream& os, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32le(os, bits);
}

inline float read_f32le(std::istream& is, const char* what) {
  std::uint32_t bits = read_u32le(is, what);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

// ---------------------------------------------------------------------------
// ARTF: "ARTF", u32 n_frames, u32 width, u32 height, then n*h*w u8 row-major.

inline void save_artf(const FrameSequence& seq, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write("ARTF", 4);
  write_u32le(os, static_cast<std::uint32_t>(seq.size()));
  write_u32le(os, static_cast<std::uint32_t>(seq.width));
  write_u32le(os, static_cast<std::uint32_t>(seq.height));
  std::vector<unsigned char> row(static_cast<std::size_t>(seq.width));
  for (const Frame& f : seq.frames) {
    for (int y = 0; y < seq.height; ++y) {
      const float* src = f.pixels.row(y);
      for (int x = 0; x < seq.width; ++x) {
        double v = std::lround(static_cast<double>(src[x]));
        row[x] = static_cast<unsigned char>(v < 0 ? 0 : (v > 255 ? 255 : v));
      }
      os.write(reinterpret_cast<const char*>(row.data()), seq.width);
    }
  }
  if (!os) throw IoError("write failed: " + path);
}

inline FrameSequence load_artf(const std::string& path, int stride = 1) {
  if (stride < 1) throw ValidationError("stride must be >= 1");
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "ARTF", 4) != 0) throw IoError("not an ARTF file: " + path);
  std::uint32_t n = read_u32le(is, "ARTF frame count");
  std::uint32_t w = read_u32le(is, "ARTF width");
  std::uint32_t h = read_u32le(is, "ARTF height");
  if (w == 0 || h == 0) throw ValidationError("ARTF with zero frame dimensions: " + path);

  FrameSequence seq;
  seq.width = static_cast<int>(w);
  seq.height = static_cast<int>(h);
  seq.source_id = path;
  std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h);
  for (std::uint32_t i = 0; i < n; ++i) {
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!is) throw IoError("truncated ARTF payload: " + path);
    if (i % static_cast<std::uint32_t>(stride) != 0) continue;
    Frame f;
    f.pixels = Matf(seq.height, seq.width);
    for (std::size_t k = 0; k < buf.size(); ++k) f.pixels.data()[k] = buf[k];
    f.index = static_cast<int>(seq.frames.size());
    seq.frames.push_back(std::move(f));
  }
  if (seq.size() < 2) throw ValidationError("sequence needs at least 2 frames: " + path);
  return seq;
}

// ---------------------------------------------------------------------------
// ARTV: "ARTV", u32 n, u32 dim, then n*dim little-endian f32 row-major.

inline void save_artv(const std::vector<std::vector<float>>& vectors, int dim,
                      const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write("ARTV", 4);
  write_u32le(os, static_cast<std::uint32_t>(vectors.size()));
  write_u32le(os, static_cast<std::uint32_t>(dim));
  for (const auto& v : vectors) {
    for (float x : v) write_f32le(os, x);
  }
  if (!os) throw IoError("write failed: " + path);
}

inline void save_artv(const FeatureVectorSequence& seq, const std::string& path) {
  save_artv(seq.vectors, seq.dim, path);
}

inline FeatureVectorSequence load_artv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "ARTV", 4) != 0) throw IoError("not an ARTV file: " + path);
  std::uint32_t n = read_u32le(is, "ARTV vector count");
  std::uint32_t dim = read_u32le(is, "ARTV dimension");
  if (dim == 0) throw ValidationError("ARTV with zero dimension: " + path);
  FeatureVectorSequence seq;
  seq.dim = static_cast<int>(dim);
  seq.source_id = path;
  seq.vectors.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    auto& v = seq.vectors[i];
    v.resize(dim);
    for (std::uint32_t d = 0; d < dim; ++d) {
      v[d] = read_f32le(is, "ARTV payload");
      if (!std::isfinite(v[d]))
        throw ValidationError("ARTV contains a non-finite value: " + path);
    }
  }
  return seq;
}

/// Dump a real matrix as ARTV (one vector per row, dim = cols). Used for
/// similarity-matrix and flow-field debug output.
template <typename T>
void save_matrix_artv(const Mat<T>& m, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write("ARTV", 4);
  write_u32le(os, static_cast<std::uint32_t>(m.rows()));
  write_u32le(os, static_cast<std::uint32_t>(m.cols()));
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) write_f32le(os, static_cast<float>(m(r, c)));
  if (!os) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// PGM (P5 binary / P2 ascii, 8-bit)

inline Matf read_pgm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  auto next_token = [&is, &path]() -> std::string {
    std::string tok;
    for (;;) {
      int ch = is.get();
      if (ch == EOF) {
        if (tok.empty()) throw IoError("truncated PGM header: " + path);
        return tok;
      }
      if (ch == '#') {
        std::string line;
        std::getline(is, line);
        continue;
      }
      if (std::isspace(ch)) {
        if (!tok.empty()) return tok;
        continue;
      }
      tok.push_back(static_cast<char>(ch));
    }
  };
  std::string magic = next_token();
  if (magic != "P5" && magic != "P2") throw IoError("not a PGM file: " + path);
  int w = std::stoi(next_token());
  int h = std::stoi(next_token());
  int maxval = std::stoi(next_token());
  if (w <= 0 || h <= 0) throw IoError("invalid PGM dimensions: " + path);
  if (maxval <= 0 || maxval > 255) throw IoError("unsupported PGM maxval: " + path);
  Matf img(h, w);
  if (magic == "P5") {
    std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h);
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!is) throw IoError("truncated PGM payload: " + path);
    for (std::size_t k = 0; k < buf.size(); ++k) img.data()[k] = buf[k];
  } else {
    for (std::size_t k = 0; k < img.size(); ++k) img.data()[k] = std::stof(next_token());
  }
  return img;
}

inline void write_pgm(const Matf& img, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << "P5\n" << img.cols() << " " << img.rows() << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(img.cols()));
  for (int y = 0; y < img.rows(); ++y) {
    const float* src = img.row(y);
    for (int x = 0; x < img.cols(); ++x) {
      long v = std::lround(static_cast<double>(src[x]));
      row[x] = static_cast<unsigned char>(v < 0 ? 0 : (v > 255 ? 255 : v));
    }
    os.write(reinterpret_cast<const char*>(row.data()), img.cols());
  }
  if (!os) throw IoError("write failed: " + path);
}

/// Min-max scale an arbitrary real matrix into [0,255] and write it as PGM.
template <typename T>
void write_pgm_scaled(const Mat<T>& m, const std::string& path) {
  Matf img(m.rows(), m.cols(), 0.0f);
  if (!m.empty()) {
    double lo = static_cast<double>(m.min_value());
    double hi = static_cast<double>(m.max_value());
    double range = hi - lo;
    if (range > 0) {
      for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c)
          img(r, c) = static_cast<float>(255.0 * (static_cast<double>(m(r, c)) - lo) / range);
    }
  }
  write_pgm(img, path);
}

// ---------------------------------------------------------------------------
// PNG via libpng; color inputs are reduced with the luma weights above.

inline Matf read_png(const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw IoError("cannot open: " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw IoError("libpng init failed");
  }
  std::vector<png_bytep> row_ptrs;
  std::vector<unsigned char> pixels;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw IoError("failed to decode PNG: " + path);
  }
  png_init_io(png, fp);
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  int color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);

  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  int channels = png_get_channels(png, info);
  std::size_t stride = png_get_rowbytes(png, info);
  pixels.resize(stride * h);
  row_ptrs.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) row_ptrs[y] = pixels.data() + y * stride;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);

  Matf img(static_cast<int>(h), static_cast<int>(w));
  for (png_uint_32 y = 0; y < h; ++y) {
    const unsigned char* src = pixels.data() + y * stride;
    float* dst = img.row(static_cast<int>(y));
    if (channels == 1) {
      for (png_uint_32 x = 0; x < w; ++x) dst[x] = src[x];
    } else if (channels >= 3) {
      for (png_uint_32 x = 0; x < w; ++x)
        dst[x] = luma(src[x * channels], src[x * channels + 1], src[x * channels + 2]);
    } else {
      throw IoError("unsupported PNG channel layout: " + path);
    }
  }
  return img;
}

inline void write_png_impl(const std::string& path, int w, int h, int color_type,
                           int channels, const std::vector<unsigned char>& pixels) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw IoError("cannot open for writing: " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError("failed to encode PNG: " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < h; ++y)
    png_write_row(png, const_cast<png_bytep>(pixels.data() +
                                             static_cast<std::size_t>(y) * w * channels));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

inline void write_png(const Matf& img, const std::string& path) {
  std::vector<unsigned char> pixels(img.size());
  for (std::size_t k = 0; k < img.size(); ++k) {
    long v = std::lround(static_cast<double>(img.data()[k]));
    pixels[k] = static_cast<unsigned char>(v < 0 ? 0 : (v > 255 ? 255 : v));
  }
  write_png_impl(path, img.cols(), img.rows(), PNG_COLOR_TYPE_GRAY, 1, pixels);
}

inline void write_png_rgb(const Matf& r, const Matf& g, const Matf& b,
                          const std::string& path) {
  if (!r.same_size(g) || !r.same_size(b))
    throw ValidationError("write_png_rgb: channel size mismatch");
  std::vector<unsigned char> pixels(r.size() * 3);
  auto clamp8 = [](float v) {
    long x = std::lround(static_cast<double>(v));
    return static_cast<unsigned char>(x < 0 ? 0 : (x > 255 ? 255 : x));
  };
  for (std::size_t k = 0; k < r.size(); ++k) {
    pixels[k * 3] = clamp8(r.data()[k]);
    pixels[k * 3 + 1] = clamp8(g.data()[k]);
    pixels[k * 3 + 2] = clamp8(b.data()[k]);
  }
  write_png_impl(path, r.cols(), r.rows(), PNG_COLOR_TYPE_RGB, 3, pixels);
}

// ---------------------------------------------------------------------------

inline Matf read_image(const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(c));
  if (ext == ".png") return read_png(path);
  if (ext == ".pgm") return read_pgm(path);
  throw IoError("unsupported image extension: " + path);
}

/// Load a frame sequence from an image directory (PNG/PGM, lexicographic
/// filename order) or a packed ARTF file. `stride` keeps every k-th frame.
inline FrameSequence load_frames(const std::string& path, FrameFormat format,
                                 int stride = 1) {
  if (stride < 1) throw ValidationError("stride must be >= 1");
  if (format == FrameFormat::packed_binary) return load_artf(path, stride);

  namespace fs = std::filesystem;
  if (!fs::is_directory(path)) throw IoError("not a directory: " + path);
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(c));
    if (ext == ".png" || ext == ".pgm") names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());

  FrameSequence seq;
  seq.source_id = path;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i % static_cast<std::size_t>(stride) != 0) continue;
    Matf img = read_image((fs::path(path) / names[i]).string());
    if (seq.frames.empty()) {
      seq.width = img.cols();
      seq.height = img.rows();
    } else if (img.cols() != seq.width || img.rows() != seq.height) {
      throw ValidationError("frame dimension mismatch in " + path + " at " + names[i]);
    }
    Frame f;
    f.pixels = std::move(img);
    f.index = static_cast<int>(seq.frames.size());
    seq.frames.push_back(std::move(f));
  }
  if (seq.size() < 2) throw ValidationError("sequence needs at least 2 frames: " + path);
  return seq;
}

/// Auto-detect: directories are image dirs, files are ARTF.
inline FrameSequence load_frames_auto(const std::string& path, int stride = 1) {
  if (std::filesystem::is_directory(path))
    return load_frames(path, FrameFormat::image_dir, stride);
  return load_frames(path, FrameFormat::packed_binary, stride);
}

// ---------------------------------------------------------------------------

/// Center-aligned bilinear downscale. The result stays real-valued; output
/// values never leave the input [min, max] range.
inline Matf downscale(const Matf& src, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) throw ValidationError("downscale: zero target dimension");
  if (out_w > src.cols() || out_h > src.rows())
    throw ValidationError("downscale: target larger than source");
  if (out_w == src.cols() && out_h == src.rows()) return src;

  Matf dst(out_h, out_w);
  const double sx = static_cast<double>(src.cols()) / out_w;
  const double sy = static_cast<double>(src.rows()) / out_h;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    if (fy < 0) fy = 0;
    if (fy > src.rows() - 1) fy = src.rows() - 1;
    int y0 = static_cast<int>(fy);
    int y1 = std::min(y0 + 1, src.rows() - 1);
    double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      if (fx < 0) fx = 0;
      if (fx > src.cols() - 1) fx = src.cols() - 1;
      int x0 = static_cast<int>(fx);
      int x1 = std::min(x0 + 1, src.cols() - 1);
      double wx = fx - x0;
      double top = (1 - wx) * src(y0, x0) + wx * src(y0, x1);
      double bot = (1 - wx) * src(y1, x0) + wx * src(y1, x1);
      dst(y, x) = static_cast<float>((1 - wy) * top + wy * bot);
    }
  }
  return dst;
}

inline Frame downscale(const Frame& f, int out_w, int out_h) {
  Frame out;
  out.pixels = downscale(f.pixels, out_w, out_h);
  out.index = f.index;
  return out;
}

}  // namespace artis
