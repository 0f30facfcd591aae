#include "codedstereo/image.hpp"

#include <algorithm>
#include <cmath>

#include "codedstereo/errors.hpp"

namespace cs {

double grid_sum(const Grid& g) {
  double s = 0.0;
  for (size_t i = 0; i < g.size(); ++i) s += g[i];
  return s;
}

double grid_min(const Grid& g) {
  double m = g.empty() ? 0.0 : g[0];
  for (size_t i = 1; i < g.size(); ++i) m = std::min(m, g[i]);
  return m;
}

double grid_max(const Grid& g) {
  double m = g.empty() ? 0.0 : g[0];
  for (size_t i = 1; i < g.size(); ++i) m = std::max(m, g[i]);
  return m;
}

double grid_mean(const Grid& g) {
  if (g.empty()) return 0.0;
  return grid_sum(g) / static_cast<double>(g.size());
}

bool grid_finite(const Grid& g) {
  for (size_t i = 0; i < g.size(); ++i)
    if (!std::isfinite(g[i])) return false;
  return true;
}

void clip01(Grid& g) {
  for (size_t i = 0; i < g.size(); ++i) g[i] = std::clamp(g[i], 0.0, 1.0);
}

void clip01(Image& img) {
  for (auto& c : img.ch) clip01(c);
}

Grid downsample_mean(const Grid& g, int factor) {
  if (factor <= 0) throw DomainError("downsample_mean: factor must be positive");
  if (g.height() % factor != 0 || g.width() % factor != 0)
    throw DomainError("downsample_mean: shape not divisible by factor");
  Grid out(g.height() / factor, g.width() / factor);
  const double inv = 1.0 / (static_cast<double>(factor) * factor);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) {
      double s = 0.0;
      for (int dy = 0; dy < factor; ++dy)
        for (int dx = 0; dx < factor; ++dx)
          s += g(y * factor + dy, x * factor + dx);
      out(y, x) = s * inv;
    }
  return out;
}

Grid transpose(const Grid& g) {
  Grid out(g.width(), g.height());
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x) out(x, y) = g(y, x);
  return out;
}

Grid shift_columns_replicate(const Grid& g, int shift) {
  Grid out(g.height(), g.width());
  for (int y = 0; y < g.height(); ++y) {
    const double* src = g.row(y);
    double* dst = out.row(y);
    for (int x = 0; x < g.width(); ++x) {
      int sx = std::clamp(x - shift, 0, g.width() - 1);
      dst[x] = src[sx];
    }
  }
  return out;
}

}  // namespace cs
