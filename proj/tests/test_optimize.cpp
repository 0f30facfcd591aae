#include <cmath>
#include <cstdlib>
#include <vector>

#include "codedstereo/errors.hpp"
#include "codedstereo/metrics.hpp"
#include "codedstereo/optics.hpp"
#include "codedstereo/optimize.hpp"
#include "codedstereo/render.hpp"
#include "codedstereo/rng.hpp"
#include "codedstereo/synth.hpp"
#include "doctest.h"

using namespace cs;

namespace {

// Fewer disparity levels keep the PSF stacks small so full-pipeline calls
// stay fast; the optical geometry is untouched.
OpticalConfig small_config() {
  OpticalConfig cfg;
  cfg.num_disparity_levels = 7;
  return cfg;
}

std::vector<Scene> small_scenes() {
  return {make_plane_scene(48, 224, {96.0}, 61, "near"),
          make_plane_scene(48, 224, {32.0}, 62, "far")};
}

}  // namespace

TEST_CASE("evaluate_mask is deterministic and decomposes") {
  OpticalConfig cfg = small_config();
  std::vector<Scene> scenes = small_scenes();
  PhaseMask flat = make_flat_mask(cfg.mask_grid_size);
  LossWeights weights;

  EvalResult a = evaluate_mask(flat, scenes, cfg, weights, 0.02, 77);
  EvalResult b = evaluate_mask(flat, scenes, cfg, weights, 0.02, 77);
  CHECK(a.loss.total == b.loss.total);
  CHECK(a.loss.disp == b.loss.disp);
  CHECK(a.metrics.psnr_db == b.metrics.psnr_db);

  EvalResult c = evaluate_mask(flat, scenes, cfg, weights, 0.02, 78);
  CHECK(c.loss.total != a.loss.total);

  CHECK(a.loss.total ==
        doctest::Approx(a.loss.disp + weights.gamma * a.loss.rgb).epsilon(1e-12));
  CHECK(a.loss.total > 0.0);
  CHECK(std::isfinite(a.metrics.psnr_db));
}

TEST_CASE("fd_gradient freezes piston and reads the defocus direction") {
  OpticalConfig cfg = small_config();
  std::vector<Scene> scenes = {make_plane_scene(48, 224, {96.0}, 61, "near")};
  ZernikeBasis basis = build_zernike_basis(cfg.mask_grid_size, 6);
  PhaseMask flat = mask_from_coefficients(basis, std::vector<double>(6, 0.0), "flat");
  LossWeights weights;

  std::vector<double> g =
      fd_gradient(flat, basis, 20e-9, scenes, cfg, weights, 0.02, 5);
  REQUIRE(g.size() == 6);
  CHECK(g[0] == 0.0);
  double nonzero = 0.0;
  for (double v : g) nonzero += std::abs(v);
  CHECK(nonzero > 0.0);
  for (double v : g) CHECK(std::isfinite(v));

  std::vector<double> g2 =
      fd_gradient(flat, basis, 20e-9, scenes, cfg, weights, 0.02, 5);
  for (size_t i = 0; i < g.size(); ++i) CHECK(g[i] == g2[i]);
}

TEST_CASE("fit_coefficients inverts mask synthesis") {
  OpticalConfig cfg;
  ZernikeBasis basis = build_zernike_basis(cfg.mask_grid_size, 12);
  Rng rng(303);
  std::vector<double> coeffs(12);
  for (auto& c : coeffs) c = rng.uniform(-3e-7, 3e-7);

  PhaseMask mask = mask_from_coefficients(basis, coeffs, "probe");
  std::vector<double> fitted = fit_coefficients(basis, mask.height_map);
  REQUIRE(fitted.size() == coeffs.size());
  for (size_t i = 0; i < coeffs.size(); ++i)
    CHECK(fitted[i] == doctest::Approx(coeffs[i]).epsilon(1e-9));
}

TEST_CASE("optimize_mask runs, logs, and never loses to its start") {
  OpticalConfig cfg = small_config();
  std::vector<Scene> scenes = small_scenes();
  PhaseMask flat = make_flat_mask(cfg.mask_grid_size);

  OptimizeSettings settings;
  settings.iterations = 2;
  settings.batch_size = 1;
  settings.sigma = 0.02;
  settings.seed = 5;

  OptimizeReport report = optimize_mask(flat, scenes, cfg, settings);
  REQUIRE(report.iterations.size() == 2);
  CHECK(report.iterations[0].iter == 1);
  CHECK(report.iterations[1].iter == 2);
  CHECK(report.best_loss <= report.initial_loss);
  CHECK(report.initial_loss > 0.0);
  CHECK(report.best_iteration >= 0);
  CHECK(report.final_mask.provenance == "learned");
  CHECK(report.final_mask.coefficients.size() == 55);
  CHECK(report.seed == 5);

  // Step sizes follow the cosine-decayed learning rate.
  CHECK(report.iterations[0].lr <= settings.lr + 1e-18);
  CHECK(report.iterations[1].lr < report.iterations[0].lr);
  CHECK(report.iterations[0].step_l2 > 0.0);

  // The best mask re-evaluates to exactly the recorded best loss.
  EvalResult check = evaluate_mask(report.final_mask, scenes, cfg, settings.weights,
                                   settings.sigma, Rng::derive(settings.seed, 0xE7A1));
  CHECK(check.loss.total == doctest::Approx(report.best_loss).epsilon(1e-12));
}

TEST_CASE("make_fisher_mask returns a sane phase surface") {
  OpticalConfig cfg = small_config();
  PhaseMask m = make_fisher_mask(cfg, 1, 50e-9, 20e-9, 2);
  CHECK(m.provenance == "fisher");
  CHECK(m.height_map.height() == cfg.mask_grid_size);
  CHECK(grid_finite(m.height_map));
  CHECK(grid_max(m.height_map) < 5e-6);
  CHECK(grid_min(m.height_map) > -5e-6);
  CHECK(m.coefficients.size() == 55);

  PsfStack stack = compute_psf_stack(m, cfg);
  CHECK(std::isfinite(fisher_objective(stack, cfg)));
}

TEST_CASE("compare_masks prepends the conventional baselines") {
  OpticalConfig cfg = small_config();
  std::vector<Scene> scenes = small_scenes();
  PhaseMask cubic = make_cubic_mask(2e-6, cfg);

  std::vector<MaskRow> rows =
      compare_masks({{"cubic", cubic}}, scenes, cfg, LossWeights{}, 0.005, 99);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].name == "flat-f8");
  CHECK(rows[1].name == "flat-f32");
  CHECK(rows[2].name == "cubic");

  // Equal-exposure stop-down: sigma scales with the square of the f-number.
  CHECK(rows[0].sigma == 0.005);
  CHECK(rows[1].sigma == doctest::Approx(0.005 * 16.0).epsilon(1e-12));
  CHECK(rows[2].sigma == 0.005);

  for (const MaskRow& row : rows) {
    CHECK(std::isfinite(row.psnr_db));
    CHECK(std::isfinite(row.epe_px));
    CHECK(row.metrics.per_disparity_psnr.size() == cfg.disparity_levels().size());
    CHECK(row.ssim <= 1.0);
    CHECK(row.bad3_pct >= 0.0);
  }

  // The auto threshold comes from the flat-f8 curve, so that row always
  // keeps a nonempty span.
  CHECK(rows[0].dof.level_lo >= 0);
  CHECK(rows[0].dof.level_hi >= rows[0].dof.level_lo);

  CHECK_THROWS_AS(compare_masks({}, scenes, cfg, LossWeights{}, 0.005, 99), ConfigError);
}

TEST_CASE("gamma_ablation labels and evaluates each setting") {
  OpticalConfig cfg = small_config();
  std::vector<Scene> scenes = {make_plane_scene(48, 224, {96.0}, 61, "near")};
  PhaseMask flat = make_flat_mask(cfg.mask_grid_size);

  OptimizeSettings base;
  base.iterations = 1;
  base.batch_size = 1;
  base.sigma = 0.02;
  base.seed = 9;

  std::vector<GammaRow> rows = gamma_ablation({0.5, -1.0}, flat, scenes, cfg, base);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].label == "0.5");
  CHECK(rows[0].gamma == 0.5);
  CHECK(rows[1].label == "rgb-only");
  for (const GammaRow& row : rows) {
    CHECK(std::isfinite(row.psnr_db));
    CHECK(std::isfinite(row.epe_px));
    CHECK(row.ssim > 0.0);
  }
}
