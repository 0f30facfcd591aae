#include "codedstereo/stereo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "codedstereo/errors.hpp"
#include "codedstereo/parallel.hpp"

namespace cs {

namespace {

constexpr double kFlatStd = 1e-6;  // below this a window counts as textureless
constexpr float kNoCandidate = -2.0f;

Grid to_gray(const Image& img) {
  Grid g(img.height(), img.width());
  for (size_t i = 0; i < g.size(); ++i)
    g[i] = (img[0][i] + img[1][i] + img[2][i]) / 3.0;
  return g;
}

void box_mean_rows(const Grid& src, Grid* dst, int r) {
  const int w = src.width();
  const double inv = 1.0 / (2 * r + 1);
  for (int y = 0; y < src.height(); ++y) {
    const double* in = src.row(y);
    double* out = dst->row(y);
    double acc = 0.0;
    for (int x = -r; x <= r; ++x) acc += in[std::clamp(x, 0, w - 1)];
    out[0] = acc * inv;
    for (int x = 1; x < w; ++x) {
      acc += in[std::min(x + r, w - 1)] - in[std::clamp(x - r - 1, 0, w - 1)];
      out[x] = acc * inv;
    }
  }
}

struct MatchMaps {
  Grid disparity;
  Grid best_cost;
};

// Matches ref against other; a pixel at x in ref corresponds to x - sign*d
// in other, so other is shifted by sign*d before comparison (sign +1 when
// ref is the left view).
MatchMaps match_one(const Grid& ref, const Grid& other, int radius, int max_disp,
                    int sign) {
  const int h = ref.height();
  const int w = ref.width();
  const size_t n = ref.size();

  Grid mu_ref = box_mean(ref, radius);
  Grid sq(h, w);
  for (size_t i = 0; i < n; ++i) sq[i] = ref[i] * ref[i];
  Grid var_ref = box_mean(sq, radius);
  std::vector<double> s_ref(n);
  for (size_t i = 0; i < n; ++i)
    s_ref[i] = std::sqrt(std::max(var_ref[i] - mu_ref[i] * mu_ref[i], 0.0));

  Grid mu_oth = box_mean(other, radius);
  for (size_t i = 0; i < n; ++i) sq[i] = other[i] * other[i];
  Grid var_oth = box_mean(sq, radius);
  Grid s_oth(h, w);
  for (size_t i = 0; i < n; ++i)
    s_oth[i] = std::sqrt(std::max(var_oth[i] - mu_oth[i] * mu_oth[i], 0.0));

  std::vector<float> best_cost(n, -2.0f), c_minus(n, 0.0f), c_plus(n, 0.0f),
      prev(n, 0.0f), cur(n, 0.0f);
  std::vector<int> best_d(n, 0);
  std::vector<uint8_t> plus_pending(n, 0);

  Grid prod(h, w);
  for (int d = 0; d <= max_disp; ++d) {
    const int shift = sign * d;
    // Correlation plane: E[ref*oth_d] - mu_ref*mu_oth_d over s_ref*s_oth_d,
    // with the other view's statistics shifted instead of refiltered.
    for (int y = 0; y < h; ++y) {
      const double* a = ref.row(y);
      const double* b = other.row(y);
      double* p = prod.row(y);
      for (int x = 0; x < w; ++x)
        p[x] = a[x] * b[std::clamp(x - shift, 0, w - 1)];
    }
    Grid e_ab = box_mean(prod, radius);
    for (int y = 0; y < h; ++y) {
      const size_t row = static_cast<size_t>(y) * w;
      const double* eab = e_ab.row(y);
      const double* mr = mu_ref.row(y);
      const double* mo = mu_oth.row(y);
      const double* so = s_oth.row(y);
      for (int x = 0; x < w; ++x) {
        const int xs = x - shift;
        // A shift that lands outside the other view is not a candidate; the
        // shifted statistics would no longer describe the sampled window and
        // the normalized score loses its [-1, 1] bound.
        if (xs < 0 || xs >= w) {
          cur[row + x] = kNoCandidate;
          continue;
        }
        const double denom = s_ref[row + x] * so[xs];
        double z = 0.0;
        if (denom > kFlatStd * kFlatStd)
          z = std::clamp((eab[x] - mr[x] * mo[xs]) / denom, -1.0, 1.0);
        cur[row + x] = static_cast<float>(z);
      }
    }
    for (size_t i = 0; i < n; ++i) {
      if (plus_pending[i] && best_d[i] == d - 1) {
        c_plus[i] = cur[i];
        plus_pending[i] = 0;
      }
      if (cur[i] > best_cost[i]) {
        best_cost[i] = cur[i];
        best_d[i] = d;
        c_minus[i] = (d > 0) ? prev[i] : cur[i];
        c_plus[i] = cur[i];
        plus_pending[i] = 1;
      }
    }
    std::swap(prev, cur);
  }

  MatchMaps out;
  out.disparity = Grid(h, w);
  out.best_cost = Grid(h, w);
  for (size_t i = 0; i < n; ++i) {
    const double c0 = best_cost[i];
    const double cm = c_minus[i];
    const double cp = c_plus[i];
    double delta = 0.0;
    const double denom = cm - 2.0 * c0 + cp;
    // A peak at the correlation bound is already at its true lag, and
    // no-candidate sentinels next to the peak give the parabola nothing real
    // to fit.
    const bool neighbors_real = cm > kNoCandidate + 0.5 && cp > kNoCandidate + 0.5;
    if (c0 < 1.0 - 1e-9 && neighbors_real && denom < -1e-12 && best_d[i] > 0 &&
        best_d[i] < max_disp)
      delta = std::clamp((cm - cp) / (2.0 * denom), -0.5, 0.5);
    out.disparity[i] = best_d[i] + delta;
    out.best_cost[i] = c0;
  }
  return out;
}

// Fills pixels marked invalid with the nearest valid disparity to their left
// (leading invalid runs take the first valid value from the right).
void background_fill(Grid* disp, const std::vector<uint8_t>& valid) {
  const int h = disp->height();
  const int w = disp->width();
  for (int y = 0; y < h; ++y) {
    double* row = disp->row(y);
    const uint8_t* v = &valid[static_cast<size_t>(y) * w];
    int first_valid = -1;
    for (int x = 0; x < w; ++x)
      if (v[x]) {
        first_valid = x;
        break;
      }
    if (first_valid < 0) continue;  // nothing trustworthy in this row
    for (int x = 0; x < first_valid; ++x) row[x] = row[first_valid];
    double carry = row[first_valid];
    for (int x = first_valid + 1; x < w; ++x) {
      if (v[x])
        carry = row[x];
      else
        row[x] = carry;
    }
  }
}

}  // namespace

Grid box_mean(const Grid& g, int radius) {
  if (radius < 0) throw DomainError("box_mean: radius must be >= 0");
  if (radius == 0) return g;
  Grid tmp(g.height(), g.width());
  box_mean_rows(g, &tmp, radius);
  Grid tmp_t = transpose(tmp);
  Grid out_t(tmp_t.height(), tmp_t.width());
  box_mean_rows(tmp_t, &out_t, radius);
  return transpose(out_t);
}

StereoResult match_stereo(const Image& left, const Image& right,
                          const OpticalConfig& config, int block_radius, int max_disp) {
  if (left.height() != right.height() || left.width() != right.width())
    throw ConfigError("match_stereo: image shapes differ");
  if (max_disp < 0) max_disp = static_cast<int>(std::lround(config.disparity_max));
  if (max_disp >= left.width())
    throw ConfigError("match_stereo: max_disp must be below the image width");
  if (block_radius < 1) throw ConfigError("match_stereo: block_radius must be >= 1");

  const Grid gl = to_gray(left);
  const Grid gr = to_gray(right);
  MatchMaps ml, mr;
  parallel_for(0, 2, [&](int i) {
    if (i == 0)
      ml = match_one(gl, gr, block_radius, max_disp, +1);
    else
      mr = match_one(gr, gl, block_radius, max_disp, -1);
  });

  const int h = gl.height();
  const int w = gl.width();
  StereoResult res;
  res.disparity = ml.disparity;
  res.disparity_right = mr.disparity;
  res.confidence = Grid(h, w);

  std::vector<uint8_t> valid(static_cast<size_t>(h) * w, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const size_t i = static_cast<size_t>(y) * w + x;
      const double dl = res.disparity(y, x);
      const int xr = x - static_cast<int>(std::lround(dl));
      bool ok = ml.best_cost(y, x) > kNoCandidate + 0.5;
      if (ok && xr >= 0 && xr < w)
        ok = std::abs(dl - mr.disparity(y, xr)) <= 1.0;
      else
        ok = false;
      valid[i] = ok ? 1 : 0;
      res.confidence(y, x) = ok ? std::max(0.0, ml.best_cost(y, x)) : 0.0;
    }
  background_fill(&res.disparity, valid);

  std::vector<uint8_t> valid_r(static_cast<size_t>(h) * w, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double dr = mr.disparity(y, x);
      const int xl = x + static_cast<int>(std::lround(dr));
      bool ok = mr.best_cost(y, x) > kNoCandidate + 0.5;
      if (ok && xl >= 0 && xl < w)
        ok = std::abs(dr - ml.disparity(y, xl)) <= 1.0;
      else
        ok = false;
      valid_r[static_cast<size_t>(y) * w + x] = ok ? 1 : 0;
    }
  background_fill(&res.disparity_right, valid_r);
  return res;
}

}  // namespace cs
