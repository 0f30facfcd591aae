#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "codedstereo/metrics.hpp"
#include "codedstereo/optics.hpp"
#include "codedstereo/render.hpp"

namespace cs {

struct EvalResult {
  LossBreakdown loss;
  MetricReport metrics;
};

// Full pipeline per scene (render -> stereo -> layered EDOF -> combined
// loss), averaged over scenes. Deterministic given the seed.
EvalResult evaluate_mask(const PhaseMask& mask, const std::vector<Scene>& scenes,
                         const OpticalConfig& config, const LossWeights& weights,
                         double sigma, uint64_t seed);

// Central finite differences of the combined loss per Zernike coefficient;
// the piston entry is forced to 0. All evaluations share the seed so the
// gradient measures optics, not noise realizations.
std::vector<double> fd_gradient(const PhaseMask& mask, const ZernikeBasis& basis,
                                double step, const std::vector<Scene>& scenes,
                                const OpticalConfig& config, const LossWeights& weights,
                                double sigma, uint64_t seed);

struct OptimizeSettings {
  int iterations = 50;
  double lr = 20e-9;        // meters per coefficient, cosine-decayed
  double fd_step = 20e-9;   // meters
  int batch_size = 2;       // scenes per iteration, deterministic round-robin
  double sigma = 0.02;
  uint64_t seed = 0;
  LossWeights weights;
};

struct IterationLog {
  int iter = 0;
  double loss = 0.0, loss_disp = 0.0, loss_rgb = 0.0;
  double psnr_db = 0.0, epe_px = 0.0;
  double step_l2 = 0.0;  // coefficient displacement of this Adam step
  double lr = 0.0;
};

struct OptimizeReport {
  std::vector<IterationLog> iterations;
  PhaseMask final_mask;  // best mask seen, by full-set loss
  OpticalConfig config_snapshot;
  uint64_t seed = 0;
  double initial_loss = 0.0;
  double best_loss = 0.0;
  int best_iteration = -1;
};

// Adam (beta1 0.9, beta2 0.999, eps 1e-8) over the Zernike coefficients with
// finite-difference gradients; piston stays frozen.
OptimizeReport optimize_mask(const PhaseMask& init, const std::vector<Scene>& scenes,
                             const OpticalConfig& config, const OptimizeSettings& settings);

// Adam ascent on fisher_objective alone; no imaging pipeline involved.
PhaseMask make_fisher_mask(const OpticalConfig& config, int iterations, double lr,
                           double fd_step, uint64_t seed);

// Least-squares projection of a height map onto the basis (in-disk samples).
std::vector<double> fit_coefficients(const ZernikeBasis& basis, const Grid& height_map);

struct MaskRow {
  std::string name;
  double sigma = 0.0;
  double psnr_db = 0.0, ssim = 0.0, epe_px = 0.0, bad3_pct = 0.0;
  DofSpan dof;
  MetricReport metrics;
};

// Evaluates the given masks plus conventional flat F8/F32 baselines (the F32
// row gets its sigma scaled by noise_sigma_for at equal exposure). The DOF
// threshold, when negative, is calibrated to the midpoint of the flat-F8
// per-disparity curve.
std::vector<MaskRow> compare_masks(
    const std::vector<std::pair<std::string, PhaseMask>>& masks,
    const std::vector<Scene>& scenes, const OpticalConfig& config,
    const LossWeights& weights, double sigma, uint64_t seed,
    double dof_threshold_db = -1.0);

struct GammaRow {
  std::string label;  // numeric value or "rgb-only"
  double gamma = 0.0;
  double psnr_db = 0.0, ssim = 0.0, epe_px = 0.0, bad3_pct = 0.0;
};

// Runs optimize_mask once per gamma (gamma < 0 is the rgb-only sentinel,
// alpha = 0) and tabulates the resulting masks' metrics.
std::vector<GammaRow> gamma_ablation(const std::vector<double>& gammas,
                                     const PhaseMask& init,
                                     const std::vector<Scene>& scenes,
                                     const OpticalConfig& config,
                                     const OptimizeSettings& base_settings);

}  // namespace cs
