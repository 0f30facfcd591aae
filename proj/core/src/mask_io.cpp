#include "codedstereo/mask_io.hpp"

#include <cctype>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "codedstereo/errors.hpp"

namespace cs {

namespace {

// Exact decimal of k * 10^-digits. Printing through the integer keeps the
// file a pure function of the quantized value, immune to printf rounding.
std::string lattice_decimal(long long k, int digits) {
  long long mag = 1;
  for (int i = 0; i < digits; ++i) mag *= 10;
  const unsigned long long a =
      k < 0 ? static_cast<unsigned long long>(-(k + 1)) + 1 : static_cast<unsigned long long>(k);
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%s%llu.%0*llu", k < 0 ? "-" : "",
                a / static_cast<unsigned long long>(mag), digits,
                a % static_cast<unsigned long long>(mag));
  return buf;
}

long long to_lattice(double value, double unit_scale, const char* what) {
  const double scaled = value * unit_scale;
  if (!std::isfinite(scaled) || std::abs(scaled) > 9.0e17)
    throw DataError(std::string("mask: non-finite or out-of-range ") + what);
  return std::llround(scaled);
}

struct Tokens {
  std::vector<std::string> items;
  std::vector<int> lines;
  size_t pos = 0;

  explicit Tokens(const std::string& text) {
    int line = 1;
    std::string cur;
    for (char ch : text) {
      if (ch == '\n' || std::isspace(static_cast<unsigned char>(ch))) {
        if (!cur.empty()) {
          items.push_back(cur);
          lines.push_back(line);
          cur.clear();
        }
        if (ch == '\n') ++line;
      } else {
        cur += ch;
      }
    }
    if (!cur.empty()) {
      items.push_back(cur);
      lines.push_back(line);
    }
  }

  bool done() const { return pos >= items.size(); }
  int line() const { return done() ? (lines.empty() ? 1 : lines.back()) : lines[pos]; }

  std::string next(const char* what) {
    if (done())
      throw DataError(std::string("mask: truncated file, expected ") + what +
                      " at line " + std::to_string(line()));
    return items[pos++];
  }

  double number(const char* what) {
    const int at = line();
    const std::string tok = next(what);
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0' || !std::isfinite(v))
      throw DataError(std::string("mask: bad ") + what + " '" + tok + "' at line " +
                      std::to_string(at));
    return v;
  }

  long integer(const char* what) {
    const int at = line();
    const std::string tok = next(what);
    char* end = nullptr;
    const long v = std::strtol(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0')
      throw DataError(std::string("mask: bad ") + what + " '" + tok + "' at line " +
                      std::to_string(at));
    return v;
  }
};

}  // namespace

std::string encode_mask(const PhaseMask& mask) {
  const int n = mask.height_map.height();
  if (n <= 0 || mask.height_map.width() != n)
    throw DataError("mask: height map must be square and nonempty");

  std::string prov = mask.provenance.empty() ? "unknown" : mask.provenance;
  for (char ch : prov)
    if (std::isspace(static_cast<unsigned char>(ch)))
      throw DataError("mask: provenance must be a single word");

  std::string out;
  out.reserve(static_cast<size_t>(n) * n * 14 + 256);
  out += "mask-height v1 " + std::to_string(n) + "\n";
  out += "provenance " + prov + "\n";
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      if (x) out += ' ';
      // heights fit comfortably in micrometers at 9 decimals (1 fm lattice)
      out += lattice_decimal(to_lattice(mask.height_map(y, x), 1e15, "height"), 9);
    }
    out += '\n';
  }
  if (!mask.coefficients.empty()) {
    out += "coeffs " + std::to_string(mask.coefficients.size()) + "\n";
    for (size_t j = 0; j < mask.coefficients.size(); ++j) {
      if (j) out += ' ';
      out += lattice_decimal(to_lattice(mask.coefficients[j], 1e15, "coefficient"), 15);
    }
    out += '\n';
  }
  return out;
}

PhaseMask decode_mask(const std::string& text) {
  Tokens tok(text);
  if (tok.next("magic") != "mask-height")
    throw DataError("mask: bad magic, expected 'mask-height'");
  if (tok.next("version") != "v1") throw DataError("mask: unsupported version");
  const long n = tok.integer("grid size");
  if (n <= 0 || n > 4096) throw DataError("mask: grid size out of range");
  if (tok.next("provenance keyword") != "provenance")
    throw DataError("mask: expected 'provenance' line");

  PhaseMask mask;
  mask.provenance = tok.next("provenance value");
  mask.height_map = Grid(static_cast<int>(n), static_cast<int>(n));
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      mask.height_map(y, x) = tok.number("height value") * 1e-6;

  if (!tok.done()) {
    if (tok.next("trailer") != "coeffs")
      throw DataError("mask: unexpected trailing content at line " +
                      std::to_string(tok.line()));
    const long count = tok.integer("coefficient count");
    if (count <= 0 || count > 10000) throw DataError("mask: coefficient count out of range");
    mask.coefficients.resize(count);
    for (long j = 0; j < count; ++j) mask.coefficients[j] = tok.number("coefficient");
    if (!tok.done())
      throw DataError("mask: unexpected trailing content at line " +
                      std::to_string(tok.line()));
  }
  return mask;
}

void write_mask(const std::string& path, const PhaseMask& mask) {
  const std::string text = encode_mask(mask);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError("failed writing " + path);
}

PhaseMask read_mask(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return decode_mask(ss.str());
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace cs
