#pragma once

#include <array>
#include <vector>

#include "codedstereo/image.hpp"
#include "codedstereo/optics.hpp"

namespace cs {

// PSNR in dB on [0,1] images, capped at 99 dB for exact matches.
double psnr(const Grid& estimate, const Grid& truth);
double psnr(const Image& estimate, const Image& truth);

// SSIM with an 11x11 Gaussian window (sigma 1.5), C1=0.01^2, C2=0.03^2;
// the Image overload averages the per-channel values.
double ssim(const Grid& estimate, const Grid& truth);
double ssim(const Image& estimate, const Image& truth);

double epe(const Grid& d_est, const Grid& d_true);   // mean |err| in pixels
double bad3(const Grid& d_est, const Grid& d_true);  // % of pixels with |err| > 3

// Pixels with x - d_true < this margin have no counterpart in the right view
// and are skipped by the disparity metrics in evaluate_metrics.
inline constexpr int kMatchableMargin = 8;

struct MetricReport {
  double psnr_db = 0.0;
  double ssim = 0.0;
  double epe_px = 0.0;
  double bad3_pct = 0.0;
  std::vector<double> per_disparity_psnr;  // NaN where a level has no pixels
  std::vector<double> per_disparity_epe;
};

// Full report for one scene: texture metrics averaged over the two views,
// disparity metrics on the left view, curves over the disparity levels of
// the ground-truth quantization.
MetricReport evaluate_metrics(const Image& edof_left, const Image& edof_right,
                              const Image& truth_left, const Image& truth_right,
                              const Grid& d_est, const Grid& d_true,
                              const OpticalConfig& config);

struct DofSpan {
  double disparity_span = 0.0;
  double depth_span_m = 0.0;
  int level_lo = -1;
  int level_hi = -1;
};

// Largest contiguous run of levels whose PSNR stays at or above the
// threshold; NaN entries count as below. Depth span via depth_from_disparity.
DofSpan dof_from_curve(const std::vector<double>& per_disparity_psnr,
                       const std::vector<double>& levels, double threshold_db,
                       const OpticalConfig& config);

struct LossWeights {
  std::array<double, 3> alpha = {1.0, 0.5, 0.25};  // disparity pyramid weights
  double gamma = 0.5;                              // RGB weight

  void validate() const;  // at least one weight nonzero

  bool operator==(const LossWeights&) const = default;
};

struct LossBreakdown {
  double total = 0.0;
  double disp = 0.0;  // sum_i alpha_i RMSE(d_i)
  double rgb = 0.0;   // RMSE_L + RMSE_R, unweighted
};

// Full-resolution estimate plus 2x and 4x mean-pooled copies (shapes cropped
// to divisibility before pooling).
std::vector<Grid> disparity_pyramid(const Grid& full, int levels = 3);

// total = sum_i alpha_i RMSE(d_i, pool_i(d_true)) + gamma (RMSE_L + RMSE_R).
LossBreakdown combined_loss(const Image& edof_left, const Image& edof_right,
                            const Image& truth_left, const Image& truth_right,
                            const std::vector<Grid>& d_est_pyramid, const Grid& d_true,
                            const LossWeights& weights);

}  // namespace cs
