#include "codedstereo/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <vector>

#include "codedstereo/errors.hpp"

namespace cs {

namespace {

struct FileHandle {
  FILE* f = nullptr;
  explicit FileHandle(const std::string& path, const char* mode)
      : f(std::fopen(path.c_str(), mode)) {}
  ~FileHandle() {
    if (f) std::fclose(f);
  }
  FileHandle(const FileHandle&) = delete;
  FileHandle& operator=(const FileHandle&) = delete;
};

thread_local std::string g_png_error;

// libpng error handling is longjmp-based; throwing across its C frames is
// not portable, so stash the message and jump back to the caller's setjmp.
void error_fn(png_structp png, png_const_charp msg) {
  g_png_error = msg ? msg : "unknown error";
  longjmp(png_jmpbuf(png), 1);
}

void warning_fn(png_structp, png_const_charp) {}

struct PngWriter {
  png_structp png = nullptr;
  png_infop info = nullptr;

  PngWriter() {
    png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, error_fn, warning_fn);
    if (png) info = png_create_info_struct(png);
    if (!png || !info) throw DataError("png: allocation failed");
  }
  ~PngWriter() { png_destroy_write_struct(&png, info ? &info : nullptr); }
  PngWriter(const PngWriter&) = delete;
  PngWriter& operator=(const PngWriter&) = delete;
};

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;

  PngReader() {
    png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, error_fn, warning_fn);
    if (png) info = png_create_info_struct(png);
    if (!png || !info) throw DataError("png: allocation failed");
  }
  ~PngReader() { png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
  PngReader(const PngReader&) = delete;
  PngReader& operator=(const PngReader&) = delete;
};

uint16_t to_quantum(double v, int bit_depth) {
  const double maxv = bit_depth == 16 ? 65535.0 : 255.0;
  const double clamped = std::min(1.0, std::max(0.0, v));
  return static_cast<uint16_t>(std::lround(clamped * maxv));
}

void write_rows(const std::string& path, int height, int width, int channels,
                int bit_depth, const std::vector<std::vector<uint8_t>>& rows) {
  FileHandle fh(path, "wb");
  if (!fh.f) throw DataError("cannot open " + path + " for writing");

  PngWriter w;
  if (setjmp(png_jmpbuf(w.png)))
    throw DataError(path + ": png write failed: " + g_png_error);

  png_init_io(w.png, fh.f);
  png_set_IHDR(w.png, w.info, width, height, bit_depth,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(w.png, w.info);
  for (const auto& row : rows) png_write_row(w.png, const_cast<png_bytep>(row.data()));
  png_write_end(w.png, w.info);
}

struct Decoded {
  int height = 0, width = 0, channels = 0, bit_depth = 0;
  std::vector<std::vector<uint8_t>> rows;
};

Decoded read_rows(const std::string& path) {
  FileHandle fh(path, "rb");
  if (!fh.f) throw DataError("cannot open " + path);

  Decoded out;
  PngReader r;
  if (setjmp(png_jmpbuf(r.png)))
    throw DataError(path + ": png read failed: " + g_png_error);

  png_init_io(r.png, fh.f);
  png_read_info(r.png, r.info);

  png_set_palette_to_rgb(r.png);
  png_set_expand_gray_1_2_4_to_8(r.png);
  png_set_strip_alpha(r.png);
  png_read_update_info(r.png, r.info);

  out.width = static_cast<int>(png_get_image_width(r.png, r.info));
  out.height = static_cast<int>(png_get_image_height(r.png, r.info));
  out.bit_depth = png_get_bit_depth(r.png, r.info);
  out.channels = png_get_channels(r.png, r.info);
  if (out.bit_depth != 8 && out.bit_depth != 16)
    throw DataError(path + ": unsupported bit depth " + std::to_string(out.bit_depth));
  if (out.channels != 1 && out.channels != 3)
    throw DataError(path + ": unsupported channel count " + std::to_string(out.channels));

  const size_t rowbytes = png_get_rowbytes(r.png, r.info);
  out.rows.assign(out.height, std::vector<uint8_t>(rowbytes));
  for (auto& row : out.rows) png_read_row(r.png, row.data(), nullptr);
  png_read_end(r.png, nullptr);
  return out;
}

double sample(const std::vector<uint8_t>& row, int index, int bit_depth) {
  if (bit_depth == 16) {
    const uint16_t v = static_cast<uint16_t>((row[2 * index] << 8) | row[2 * index + 1]);
    return v / 65535.0;  // PNG stores 16-bit samples big-endian
  }
  return row[index] / 255.0;
}

}  // namespace

void write_png(const std::string& path, const Image& image, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16)
    throw ConfigError("write_png: bit depth must be 8 or 16");
  if (image.ch[0].empty()) throw DataError("write_png: empty image");

  const int h = image.height(), w = image.width();
  std::vector<std::vector<uint8_t>> rows(h);
  for (int y = 0; y < h; ++y) {
    auto& row = rows[y];
    row.resize(static_cast<size_t>(w) * 3 * (bit_depth / 8));
    size_t p = 0;
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        const uint16_t q = to_quantum(image.ch[c](y, x), bit_depth);
        if (bit_depth == 16) {
          row[p++] = static_cast<uint8_t>(q >> 8);
          row[p++] = static_cast<uint8_t>(q & 0xff);
        } else {
          row[p++] = static_cast<uint8_t>(q);
        }
      }
    }
  }
  write_rows(path, h, w, 3, bit_depth, rows);
}

void write_png_gray(const std::string& path, const Grid& grid, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16)
    throw ConfigError("write_png_gray: bit depth must be 8 or 16");
  if (grid.empty()) throw DataError("write_png_gray: empty grid");

  const int h = grid.height(), w = grid.width();
  std::vector<std::vector<uint8_t>> rows(h);
  for (int y = 0; y < h; ++y) {
    auto& row = rows[y];
    row.resize(static_cast<size_t>(w) * (bit_depth / 8));
    size_t p = 0;
    for (int x = 0; x < w; ++x) {
      const uint16_t q = to_quantum(grid(y, x), bit_depth);
      if (bit_depth == 16) {
        row[p++] = static_cast<uint8_t>(q >> 8);
        row[p++] = static_cast<uint8_t>(q & 0xff);
      } else {
        row[p++] = static_cast<uint8_t>(q);
      }
    }
  }
  write_rows(path, h, w, 1, bit_depth, rows);
}

Image read_png(const std::string& path) {
  Decoded d = read_rows(path);
  Image out(d.height, d.width);
  for (int y = 0; y < d.height; ++y) {
    for (int x = 0; x < d.width; ++x) {
      if (d.channels == 1) {
        const double v = sample(d.rows[y], x, d.bit_depth);
        for (int c = 0; c < 3; ++c) out.ch[c](y, x) = v;
      } else {
        for (int c = 0; c < 3; ++c)
          out.ch[c](y, x) = sample(d.rows[y], 3 * x + c, d.bit_depth);
      }
    }
  }
  return out;
}

Grid read_png_gray(const std::string& path) {
  Decoded d = read_rows(path);
  if (d.channels != 1)
    throw DataError(path + ": expected a grayscale PNG, got " +
                    std::to_string(d.channels) + " channels");
  Grid out(d.height, d.width);
  for (int y = 0; y < d.height; ++y)
    for (int x = 0; x < d.width; ++x) out(y, x) = sample(d.rows[y], x, d.bit_depth);
  return out;
}

Grid read_png_gray_raw(const std::string& path) {
  Decoded d = read_rows(path);
  if (d.channels != 1)
    throw DataError(path + ": expected a grayscale PNG, got " +
                    std::to_string(d.channels) + " channels");
  const double maxv = d.bit_depth == 16 ? 65535.0 : 255.0;
  Grid out(d.height, d.width);
  for (int y = 0; y < d.height; ++y)
    for (int x = 0; x < d.width; ++x)
      out(y, x) = sample(d.rows[y], x, d.bit_depth) * maxv;
  return out;
}

}  // namespace cs
