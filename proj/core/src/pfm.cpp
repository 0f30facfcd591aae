#include "codedstereo/pfm.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include "codedstereo/errors.hpp"

namespace cs {

namespace {

void append_float_le(std::vector<uint8_t>& out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  out.push_back(static_cast<uint8_t>(bits));
  out.push_back(static_cast<uint8_t>(bits >> 8));
  out.push_back(static_cast<uint8_t>(bits >> 16));
  out.push_back(static_cast<uint8_t>(bits >> 24));
}

float read_float(const uint8_t* p, bool little_endian) {
  uint32_t bits;
  if (little_endian) {
    bits = static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
           static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
  } else {
    bits = static_cast<uint32_t>(p[3]) | static_cast<uint32_t>(p[2]) << 8 |
           static_cast<uint32_t>(p[1]) << 16 | static_cast<uint32_t>(p[0]) << 24;
  }
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

void append_header(std::vector<uint8_t>& out, bool color, int w, int h, double scale) {
  char buf[96];
  const int n = std::snprintf(buf, sizeof(buf), "%s\n%d %d\n%.9g\n",
                              color ? "PF" : "Pf", w, h, scale);
  out.insert(out.end(), buf, buf + n);
}

float checked_float(double v, size_t byte_offset) {
  const float f = static_cast<float>(v);
  if (!std::isfinite(f))
    throw DataError("pfm: non-finite pixel at byte offset " + std::to_string(byte_offset));
  return f;
}

[[noreturn]] void malformed(const std::string& what, size_t offset) {
  throw DataError("pfm: " + what + " at byte offset " + std::to_string(offset));
}

struct Cursor {
  const std::vector<uint8_t>& bytes;
  size_t pos = 0;

  bool eof() const { return pos >= bytes.size(); }
  char peek() const { return static_cast<char>(bytes[pos]); }

  std::string token() {
    while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) ++pos;
    if (eof()) malformed("truncated header", pos);
    const size_t start = pos;
    while (!eof() && !std::isspace(static_cast<unsigned char>(peek()))) ++pos;
    return std::string(bytes.begin() + start, bytes.begin() + pos);
  }

  // The header ends with exactly one whitespace character before the payload.
  void consume_one_space() {
    if (eof() || !std::isspace(static_cast<unsigned char>(peek())))
      malformed("missing header terminator", pos);
    ++pos;
  }
};

}  // namespace

std::vector<uint8_t> encode_pfm(const Grid& grid, double scale) {
  if (grid.empty()) throw DataError("pfm: cannot encode an empty grid");
  if (scale == 0.0) throw DataError("pfm: scale must be nonzero");
  std::vector<uint8_t> out;
  append_header(out, false, grid.width(), grid.height(), scale);
  const bool le = scale < 0.0;
  for (int y = grid.height() - 1; y >= 0; --y) {
    for (int x = 0; x < grid.width(); ++x) {
      const float f = checked_float(grid(y, x), out.size());
      if (le) {
        append_float_le(out, f);
      } else {
        std::vector<uint8_t> tmp;
        append_float_le(tmp, f);
        out.insert(out.end(), tmp.rbegin(), tmp.rend());
      }
    }
  }
  return out;
}

std::vector<uint8_t> encode_pfm(const Image& image, double scale) {
  if (image.ch[0].empty()) throw DataError("pfm: cannot encode an empty image");
  if (scale == 0.0) throw DataError("pfm: scale must be nonzero");
  std::vector<uint8_t> out;
  append_header(out, true, image.width(), image.height(), scale);
  const bool le = scale < 0.0;
  for (int y = image.height() - 1; y >= 0; --y) {
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        const float f = checked_float(image.ch[c](y, x), out.size());
        if (le) {
          append_float_le(out, f);
        } else {
          std::vector<uint8_t> tmp;
          append_float_le(tmp, f);
          out.insert(out.end(), tmp.rbegin(), tmp.rend());
        }
      }
    }
  }
  return out;
}

PfmFile decode_pfm(const std::vector<uint8_t>& bytes) {
  Cursor cur{bytes};
  const std::string magic = cur.token();
  if (magic != "Pf" && magic != "PF") malformed("bad magic '" + magic + "'", 0);

  PfmFile file;
  file.color = magic == "PF";

  const size_t w_at = cur.pos;
  const std::string w_tok = cur.token();
  const size_t h_at = cur.pos;
  const std::string h_tok = cur.token();
  char* end = nullptr;
  const long w = std::strtol(w_tok.c_str(), &end, 10);
  if (*end != '\0' || w <= 0) malformed("bad width '" + w_tok + "'", w_at);
  const long h = std::strtol(h_tok.c_str(), &end, 10);
  if (*end != '\0' || h <= 0) malformed("bad height '" + h_tok + "'", h_at);

  const size_t s_at = cur.pos;
  const std::string s_tok = cur.token();
  file.scale = std::strtod(s_tok.c_str(), &end);
  if (*end != '\0' || file.scale == 0.0 || !std::isfinite(file.scale))
    malformed("bad scale '" + s_tok + "'", s_at);
  cur.consume_one_space();

  const bool le = file.scale < 0.0;
  const int channels = file.color ? 3 : 1;
  const size_t need = static_cast<size_t>(w) * h * channels * 4;
  if (bytes.size() - cur.pos < need)
    malformed("truncated payload (need " + std::to_string(need) + " bytes, have " +
                  std::to_string(bytes.size() - cur.pos) + ")",
              cur.pos);

  if (file.color) {
    file.rgb = Image(static_cast<int>(h), static_cast<int>(w));
  } else {
    file.gray = Grid(static_cast<int>(h), static_cast<int>(w));
  }
  size_t pos = cur.pos;
  for (long y = h - 1; y >= 0; --y) {
    for (long x = 0; x < w; ++x) {
      for (int c = 0; c < channels; ++c) {
        const float v = read_float(bytes.data() + pos, le);
        if (!std::isfinite(v)) malformed("non-finite pixel", pos);
        if (file.color) {
          file.rgb.ch[c](static_cast<int>(y), static_cast<int>(x)) = v;
        } else {
          file.gray(static_cast<int>(y), static_cast<int>(x)) = v;
        }
        pos += 4;
      }
    }
  }
  return file;
}

namespace {

std::vector<uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return bytes;
}

void write_file_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path);
}

}  // namespace

void write_pfm(const std::string& path, const Grid& grid, double scale) {
  write_file_bytes(path, encode_pfm(grid, scale));
}

void write_pfm(const std::string& path, const Image& image, double scale) {
  write_file_bytes(path, encode_pfm(image, scale));
}

PfmFile read_pfm(const std::string& path) {
  try {
    return decode_pfm(read_file_bytes(path));
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

Grid read_pfm_gray(const std::string& path) {
  PfmFile file = read_pfm(path);
  if (file.color)
    throw DataError(path + ": expected a 1-channel Pf file, got 3-channel PF");
  return std::move(file.gray);
}

}  // namespace cs
