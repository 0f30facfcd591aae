#include "codedstereo/plot.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "codedstereo/errors.hpp"
#include "codedstereo/png_io.hpp"

namespace cs {

namespace {

struct Color {
  double r, g, b;
};

const Color kPalette[] = {
    {0.15, 0.35, 0.80}, {0.85, 0.20, 0.15}, {0.10, 0.60, 0.30},
    {0.90, 0.55, 0.10}, {0.55, 0.25, 0.70}, {0.10, 0.60, 0.65},
};

using Glyph = std::array<const char*, 7>;

const std::map<char, Glyph>& font() {
  static const std::map<char, Glyph> f = {
      {' ', {".....", ".....", ".....", ".....", ".....", ".....", "....."}},
      {'.', {".....", ".....", ".....", ".....", ".....", ".##..", ".##.."}},
      {',', {".....", ".....", ".....", ".....", ".##..", "..#..", ".#..."}},
      {'-', {".....", ".....", ".....", "#####", ".....", ".....", "....."}},
      {'+', {".....", "..#..", "..#..", "#####", "..#..", "..#..", "....."}},
      {'_', {".....", ".....", ".....", ".....", ".....", ".....", "#####"}},
      {'=', {".....", ".....", "#####", ".....", "#####", ".....", "....."}},
      {':', {".....", "..#..", ".....", ".....", "..#..", ".....", "....."}},
      {'%', {"##..#", "##..#", "...#.", "..#..", ".#...", "#..##", "#..##"}},
      {'/', {"....#", "....#", "...#.", "..#..", ".#...", "#....", "#...."}},
      {'(', {"...#.", "..#..", ".#...", ".#...", ".#...", "..#..", "...#."}},
      {')', {".#...", "..#..", "...#.", "...#.", "...#.", "..#..", ".#..."}},
      {'0', {".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."}},
      {'1', {"..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."}},
      {'2', {".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"}},
      {'3', {".###.", "#...#", "....#", "..##.", "....#", "#...#", ".###."}},
      {'4', {"...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."}},
      {'5', {"#####", "#....", "####.", "....#", "....#", "#...#", ".###."}},
      {'6', {"..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."}},
      {'7', {"#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."}},
      {'8', {".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."}},
      {'9', {".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."}},
      {'A', {".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"}},
      {'B', {"####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."}},
      {'C', {".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."}},
      {'D', {"####.", "#...#", "#...#", "#...#", "#...#", "#...#", "####."}},
      {'E', {"#####", "#....", "#....", "####.", "#....", "#....", "#####"}},
      {'F', {"#####", "#....", "#....", "####.", "#....", "#....", "#...."}},
      {'G', {".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".###."}},
      {'H', {"#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"}},
      {'I', {".###.", "..#..", "..#..", "..#..", "..#..", "..#..", ".###."}},
      {'J', {"..###", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."}},
      {'K', {"#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"}},
      {'L', {"#....", "#....", "#....", "#....", "#....", "#....", "#####"}},
      {'M', {"#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"}},
      {'N', {"#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#", "#...#"}},
      {'O', {".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."}},
      {'P', {"####.", "#...#", "#...#", "####.", "#....", "#....", "#...."}},
      {'Q', {".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#"}},
      {'R', {"####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"}},
      {'S', {".####", "#....", "#....", ".###.", "....#", "....#", "####."}},
      {'T', {"#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."}},
      {'U', {"#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."}},
      {'V', {"#...#", "#...#", "#...#", "#...#", ".#.#.", ".#.#.", "..#.."}},
      {'W', {"#...#", "#...#", "#...#", "#.#.#", "#.#.#", "##.##", "#...#"}},
      {'X', {"#...#", ".#.#.", "..#..", "..#..", "..#..", ".#.#.", "#...#"}},
      {'Y', {"#...#", ".#.#.", "..#..", "..#..", "..#..", "..#..", "..#.."}},
      {'Z', {"#####", "....#", "...#.", "..#..", ".#...", "#....", "#####"}},
  };
  return f;
}

class Canvas {
 public:
  Canvas(int height, int width) : img_(height, width, 1.0) {}

  void put(int y, int x, const Color& c, double alpha = 1.0) {
    if (y < 0 || y >= img_.height() || x < 0 || x >= img_.width()) return;
    img_.ch[0](y, x) = (1 - alpha) * img_.ch[0](y, x) + alpha * c.r;
    img_.ch[1](y, x) = (1 - alpha) * img_.ch[1](y, x) + alpha * c.g;
    img_.ch[2](y, x) = (1 - alpha) * img_.ch[2](y, x) + alpha * c.b;
  }

  void hline(int y, int x0, int x1, const Color& c) {
    for (int x = std::min(x0, x1); x <= std::max(x0, x1); ++x) put(y, x, c);
  }

  void vline(int x, int y0, int y1, const Color& c) {
    for (int y = std::min(y0, y1); y <= std::max(y0, y1); ++y) put(y, x, c);
  }

  void line(double y0, double x0, double y1, double x1, const Color& c) {
    const double dy = y1 - y0, dx = x1 - x0;
    const int steps = std::max(2, static_cast<int>(std::ceil(
                                      std::max(std::abs(dy), std::abs(dx)) * 2)));
    for (int i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps;
      const int y = static_cast<int>(std::lround(y0 + t * dy));
      const int x = static_cast<int>(std::lround(x0 + t * dx));
      put(y, x, c);
      put(y, x + (std::abs(dy) > std::abs(dx) ? 1 : 0),
          c, 0.35);  // slight thickening to keep steep lines connected
    }
  }

  void text(int y, int x, const std::string& s, const Color& c, int scale = 1) {
    const auto& f = font();
    int cx = x;
    for (char raw : s) {
      const char ch = static_cast<char>(std::toupper(static_cast<unsigned char>(raw)));
      auto it = f.find(ch);
      const Glyph& glyph = it != f.end() ? it->second : f.at(' ');
      for (int gy = 0; gy < 7; ++gy)
        for (int gx = 0; gx < 5; ++gx)
          if (glyph[gy][gx] == '#')
            for (int sy = 0; sy < scale; ++sy)
              for (int sx = 0; sx < scale; ++sx)
                put(y + gy * scale + sy, cx + gx * scale + sx, c);
      cx += 6 * scale;
    }
  }

  static int text_width(const std::string& s, int scale = 1) {
    return static_cast<int>(s.size()) * 6 * scale;
  }

  const Image& image() const { return img_; }

 private:
  Image img_;
};

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// Tick spacing as 1/2/5 times a power of ten covering the range.
std::vector<double> nice_ticks(double lo, double hi, int target) {
  const double span = hi - lo;
  if (!(span > 0)) return {lo};
  const double raw = span / std::max(1, target);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> ticks;
  double t = std::ceil(lo / step) * step;
  for (; t <= hi + 1e-9 * span; t += step) ticks.push_back(std::abs(t) < 1e-12 ? 0.0 : t);
  return ticks;
}

}  // namespace

void write_line_plot(const std::string& path, const std::vector<PlotSeries>& series,
                     const std::string& title, const std::string& x_label,
                     const std::string& y_label, int width, int height) {
  if (series.empty()) throw ConfigError("write_line_plot: no series");
  if (width < 160 || height < 120) throw ConfigError("write_line_plot: canvas too small");

  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const PlotSeries& s : series) {
    if (s.x.size() != s.y.size())
      throw ConfigError("write_line_plot: series '" + s.label + "' x/y size mismatch");
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, s.y[i]);
      y_hi = std::max(y_hi, s.y[i]);
    }
  }
  if (!std::isfinite(x_lo)) {
    x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  }
  if (x_hi - x_lo < 1e-12) {
    x_lo -= 1;
    x_hi += 1;
  }
  const double y_pad = (y_hi - y_lo < 1e-12) ? 1.0 : 0.05 * (y_hi - y_lo);
  y_lo -= y_pad;
  y_hi += y_pad;

  const int ml = 64, mr = 18, mt = 30, mb = 46;
  const int px0 = ml, px1 = width - mr, py0 = mt, py1 = height - mb;
  auto to_px = [&](double x) {
    return px0 + (x - x_lo) / (x_hi - x_lo) * (px1 - px0);
  };
  auto to_py = [&](double y) {
    return py1 - (y - y_lo) / (y_hi - y_lo) * (py1 - py0);
  };

  Canvas canvas(height, width);
  const Color axis{0.25, 0.25, 0.25}, grid{0.88, 0.88, 0.88}, ink{0.1, 0.1, 0.1};

  for (double t : nice_ticks(x_lo, x_hi, 6)) {
    const int x = static_cast<int>(std::lround(to_px(t)));
    canvas.vline(x, py0, py1, grid);
    const std::string label = fmt_tick(t);
    canvas.text(py1 + 8, x - Canvas::text_width(label) / 2, label, ink);
  }
  for (double t : nice_ticks(y_lo, y_hi, 6)) {
    const int y = static_cast<int>(std::lround(to_py(t)));
    canvas.hline(y, px0, px1, grid);
    const std::string label = fmt_tick(t);
    canvas.text(y - 3, px0 - 6 - Canvas::text_width(label), label, ink);
  }
  canvas.hline(py1, px0, px1, axis);
  canvas.vline(px0, py0, py1, axis);

  canvas.text(8, (width - Canvas::text_width(title)) / 2, title, ink);
  canvas.text(height - 14, (width - Canvas::text_width(x_label)) / 2, x_label, ink);
  // y label along the top of the axis to avoid rotated text
  canvas.text(py0 - 12, 4, y_label, ink);

  for (size_t si = 0; si < series.size(); ++si) {
    const PlotSeries& s = series[si];
    const Color c = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
    bool have_prev = false;
    double prev_x = 0, prev_y = 0;
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        have_prev = false;
        continue;
      }
      const double cx = to_px(s.x[i]), cy = to_py(s.y[i]);
      if (have_prev) canvas.line(prev_y, prev_x, cy, cx, c);
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          if (std::abs(dy) + std::abs(dx) <= 1)
            canvas.put(static_cast<int>(std::lround(cy)) + dy,
                       static_cast<int>(std::lround(cx)) + dx, c);
      prev_x = cx;
      prev_y = cy;
      have_prev = true;
    }
  }

  int ly = py0 + 6;
  for (size_t si = 0; si < series.size(); ++si) {
    if (series[si].label.empty()) continue;
    const Color c = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
    const int lx = px1 - 120;
    canvas.hline(ly + 3, lx, lx + 14, c);
    canvas.text(ly, lx + 18, series[si].label, ink);
    ly += 12;
  }

  write_png(path, canvas.image(), 8);
}

}  // namespace cs
