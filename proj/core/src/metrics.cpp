#include "codedstereo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "codedstereo/errors.hpp"
#include "codedstereo/geometry.hpp"
#include "codedstereo/render.hpp"

namespace cs {

namespace {

constexpr double kPsnrCap = 99.0;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

void require_same_shape(const Grid& a, const Grid& b, const char* who) {
  if (!a.same_shape(b)) throw ConfigError(std::string(who) + ": shape mismatch");
}

double mse(const Grid& a, const Grid& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

double psnr_from_mse(double m) {
  if (m <= 0.0) return kPsnrCap;
  return std::min(10.0 * std::log10(1.0 / m), kPsnrCap);
}

// Separable 11-tap Gaussian, sigma 1.5, replicate borders.
Grid gaussian11(const Grid& g) {
  static const std::array<double, 11> taps = [] {
    std::array<double, 11> t{};
    double sum = 0.0;
    for (int i = 0; i < 11; ++i) {
      const double x = i - 5;
      t[i] = std::exp(-x * x / (2.0 * 1.5 * 1.5));
      sum += t[i];
    }
    for (auto& v : t) v /= sum;
    return t;
  }();

  const int h = g.height();
  const int w = g.width();
  Grid tmp(h, w);
  for (int y = 0; y < h; ++y) {
    const double* in = g.row(y);
    double* out = tmp.row(y);
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int t = -5; t <= 5; ++t) acc += taps[t + 5] * in[std::clamp(x + t, 0, w - 1)];
      out[x] = acc;
    }
  }
  Grid out(h, w);
  for (int y = 0; y < h; ++y) {
    double* o = out.row(y);
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int t = -5; t <= 5; ++t) acc += taps[t + 5] * tmp(std::clamp(y + t, 0, h - 1), x);
      o[x] = acc;
    }
  }
  return out;
}

Grid crop_to_multiple(const Grid& g, int factor) {
  const int h = g.height() - g.height() % factor;
  const int w = g.width() - g.width() % factor;
  if (h == g.height() && w == g.width()) return g;
  Grid out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out(y, x) = g(y, x);
  return out;
}

double rmse_grid(const Grid& a, const Grid& b) { return std::sqrt(mse(a, b)); }

double rmse_image(const Image& a, const Image& b) {
  double acc = 0.0;
  for (int c = 0; c < 3; ++c) acc += mse(a[c], b[c]);
  return std::sqrt(acc / 3.0);
}

}  // namespace

double psnr(const Grid& estimate, const Grid& truth) {
  require_same_shape(estimate, truth, "psnr");
  return psnr_from_mse(mse(estimate, truth));
}

double psnr(const Image& estimate, const Image& truth) {
  require_same_shape(estimate[0], truth[0], "psnr");
  double m = 0.0;
  for (int c = 0; c < 3; ++c) m += mse(estimate[c], truth[c]);
  return psnr_from_mse(m / 3.0);
}

double ssim(const Grid& estimate, const Grid& truth) {
  require_same_shape(estimate, truth, "ssim");
  const Grid& x = estimate;
  const Grid& y = truth;
  Grid xx(x.height(), x.width()), yy(x.height(), x.width()), xy(x.height(), x.width());
  for (size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const Grid mu_x = gaussian11(x);
  const Grid mu_y = gaussian11(y);
  const Grid e_xx = gaussian11(xx);
  const Grid e_yy = gaussian11(yy);
  const Grid e_xy = gaussian11(xy);

  double acc = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double mx = mu_x[i];
    const double my = mu_y[i];
    const double vx = e_xx[i] - mx * mx;
    const double vy = e_yy[i] - my * my;
    const double cxy = e_xy[i] - mx * my;
    acc += ((2 * mx * my + kC1) * (2 * cxy + kC2)) /
           ((mx * mx + my * my + kC1) * (vx + vy + kC2));
  }
  return acc / static_cast<double>(x.size());
}

double ssim(const Image& estimate, const Image& truth) {
  double acc = 0.0;
  for (int c = 0; c < 3; ++c) acc += ssim(estimate[c], truth[c]);
  return acc / 3.0;
}

double epe(const Grid& d_est, const Grid& d_true) {
  require_same_shape(d_est, d_true, "epe");
  double acc = 0.0;
  for (size_t i = 0; i < d_est.size(); ++i) acc += std::abs(d_est[i] - d_true[i]);
  return acc / static_cast<double>(d_est.size());
}

double bad3(const Grid& d_est, const Grid& d_true) {
  require_same_shape(d_est, d_true, "bad3");
  size_t count = 0;
  for (size_t i = 0; i < d_est.size(); ++i)
    if (std::abs(d_est[i] - d_true[i]) > 3.0) ++count;
  return 100.0 * static_cast<double>(count) / static_cast<double>(d_est.size());
}

MetricReport evaluate_metrics(const Image& edof_left, const Image& edof_right,
                              const Image& truth_left, const Image& truth_right,
                              const Grid& d_est, const Grid& d_true,
                              const OpticalConfig& config) {
  MetricReport report;
  report.psnr_db = 0.5 * (psnr(edof_left, truth_left) + psnr(edof_right, truth_right));
  report.ssim = 0.5 * (ssim(edof_left, truth_left) + ssim(edof_right, truth_right));

  // Disparity metrics skip pixels whose match would sit left of the right
  // view (x - d < margin): nothing observable constrains them.
  const int w = d_true.width();
  auto matchable = [&](int y, int x) {
    return x - d_true(y, x) >= static_cast<double>(kMatchableMargin);
  };
  {
    double ae = 0.0;
    size_t count = 0, bad = 0;
    for (int y = 0; y < d_true.height(); ++y)
      for (int x = 0; x < w; ++x) {
        if (!matchable(y, x)) continue;
        const double e = std::abs(d_est(y, x) - d_true(y, x));
        ae += e;
        if (e > 3.0) ++bad;
        ++count;
      }
    report.epe_px = count ? ae / count : 0.0;
    report.bad3_pct = count ? 100.0 * bad / count : 0.0;
  }

  const LayerMasks layers = quantize_disparity(d_true, config);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  report.per_disparity_psnr.assign(layers.levels.size(), nan);
  report.per_disparity_epe.assign(layers.levels.size(), nan);
  for (size_t l = 0; l < layers.masks.size(); ++l) {
    const Grid& mask = layers.masks[l];
    double se = 0.0, ae = 0.0;
    size_t count = 0, dcount = 0;
    for (int y = 0; y < mask.height(); ++y)
      for (int x = 0; x < mask.width(); ++x) {
        if (mask(y, x) <= 0.0) continue;
        ++count;
        for (int c = 0; c < 3; ++c) {
          const double dl = edof_left[c](y, x) - truth_left[c](y, x);
          const double dr = edof_right[c](y, x) - truth_right[c](y, x);
          se += 0.5 * (dl * dl + dr * dr);
        }
        if (matchable(y, x)) {
          ae += std::abs(d_est(y, x) - d_true(y, x));
          ++dcount;
        }
      }
    if (count > 0) report.per_disparity_psnr[l] = psnr_from_mse(se / (3.0 * count));
    if (dcount > 0) report.per_disparity_epe[l] = ae / dcount;
  }
  return report;
}

DofSpan dof_from_curve(const std::vector<double>& per_disparity_psnr,
                       const std::vector<double>& levels, double threshold_db,
                       const OpticalConfig& config) {
  if (per_disparity_psnr.size() != levels.size())
    throw ConfigError("dof_from_curve: curve and levels differ in length");
  DofSpan best;
  int run_start = -1;
  const int n = static_cast<int>(levels.size());
  for (int i = 0; i <= n; ++i) {
    const bool pass =
        i < n && std::isfinite(per_disparity_psnr[i]) && per_disparity_psnr[i] >= threshold_db;
    if (pass && run_start < 0) run_start = i;
    if (!pass && run_start >= 0) {
      const int lo = run_start, hi = i - 1;
      const double span = levels[hi] - levels[lo];
      if (best.level_lo < 0 || span > best.disparity_span) {
        best.disparity_span = span;
        best.level_lo = lo;
        best.level_hi = hi;
      }
      run_start = -1;
    }
  }
  if (best.level_lo >= 0) {
    best.depth_span_m = depth_from_disparity(levels[best.level_lo], config) -
                        depth_from_disparity(levels[best.level_hi], config);
  }
  return best;
}

void LossWeights::validate() const {
  if (gamma < 0) throw ConfigError("loss weights: gamma must be >= 0");
  if (gamma == 0 && alpha[0] == 0 && alpha[1] == 0 && alpha[2] == 0)
    throw ConfigError("loss weights: all weights are zero");
}

std::vector<Grid> disparity_pyramid(const Grid& full, int levels) {
  std::vector<Grid> pyramid;
  pyramid.push_back(full);
  for (int i = 1; i < levels; ++i) {
    const Grid cropped = crop_to_multiple(pyramid.back(), 2);
    pyramid.push_back(downsample_mean(cropped, 2));
  }
  return pyramid;
}

LossBreakdown combined_loss(const Image& edof_left, const Image& edof_right,
                            const Image& truth_left, const Image& truth_right,
                            const std::vector<Grid>& d_est_pyramid, const Grid& d_true,
                            const LossWeights& weights) {
  weights.validate();
  if (d_est_pyramid.size() > 3)
    throw ConfigError("combined_loss: pyramid has more levels than weights");

  LossBreakdown out;
  // The same matchability rule as the metrics: pixels without a counterpart
  // in the other view only add noise to the objective.
  Grid truth_level = d_true;
  Grid weight_level(d_true.height(), d_true.width());
  for (int y = 0; y < d_true.height(); ++y)
    for (int x = 0; x < d_true.width(); ++x)
      weight_level(y, x) =
          x - d_true(y, x) >= static_cast<double>(kMatchableMargin) ? 1.0 : 0.0;

  for (size_t i = 0; i < d_est_pyramid.size(); ++i) {
    if (i > 0) {
      truth_level = downsample_mean(crop_to_multiple(truth_level, 2), 2);
      weight_level = downsample_mean(crop_to_multiple(weight_level, 2), 2);
    }
    require_same_shape(d_est_pyramid[i], truth_level, "combined_loss");
    double se = 0.0, wsum = 0.0;
    for (size_t j = 0; j < truth_level.size(); ++j) {
      const double e = d_est_pyramid[i][j] - truth_level[j];
      se += weight_level[j] * e * e;
      wsum += weight_level[j];
    }
    out.disp += weights.alpha[i] * (wsum > 0.0 ? std::sqrt(se / wsum) : 0.0);
  }
  out.rgb = rmse_image(edof_left, truth_left) + rmse_image(edof_right, truth_right);
  out.total = out.disp + weights.gamma * out.rgb;
  return out;
}

}  // namespace cs
