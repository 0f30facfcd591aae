#include "codedstereo/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "codedstereo/errors.hpp"
#include "codedstereo/rng.hpp"
#include "codedstereo/stereo.hpp"
#include "codedstereo/wiener.hpp"

namespace cs {

namespace {

EvalResult evaluate_with_stack(const PsfStack& stack, const std::string& mask_id,
                               const std::vector<Scene>& scenes,
                               const OpticalConfig& config, const LossWeights& weights,
                               double sigma, uint64_t seed) {
  weights.validate();
  if (scenes.empty()) throw ConfigError("evaluate_mask: empty scene list");

  const size_t levels = config.disparity_levels().size();
  EvalResult out;
  out.metrics.per_disparity_psnr.assign(levels, 0.0);
  out.metrics.per_disparity_epe.assign(levels, 0.0);
  std::vector<int> psnr_count(levels, 0), epe_count(levels, 0);

  for (size_t i = 0; i < scenes.size(); ++i) {
    const Scene& scene = scenes[i];
    const uint64_t scene_seed = Rng::derive(seed, i);
    CodedPair pair =
        render_stereo_pair_with_stack(scene, stack, config, sigma, scene_seed, mask_id);
    StereoResult stereo = match_stereo(pair.coded_left, pair.coded_right, config);
    auto [edof_left, edof_right] =
        edof_reconstruct(pair, stack, EdofMode::kLayered, &stereo.disparity,
                         &stereo.disparity_right, -1.0, config);

    std::vector<Grid> pyramid = disparity_pyramid(stereo.disparity);
    LossBreakdown loss =
        combined_loss(edof_left, edof_right, scene.texture_left, scene.texture_right,
                      pyramid, scene.disparity_left, weights);
    MetricReport report =
        evaluate_metrics(edof_left, edof_right, scene.texture_left, scene.texture_right,
                         stereo.disparity, scene.disparity_left, config);

    out.loss.total += loss.total;
    out.loss.disp += loss.disp;
    out.loss.rgb += loss.rgb;
    out.metrics.psnr_db += report.psnr_db;
    out.metrics.ssim += report.ssim;
    out.metrics.epe_px += report.epe_px;
    out.metrics.bad3_pct += report.bad3_pct;
    for (size_t l = 0; l < levels; ++l) {
      if (std::isfinite(report.per_disparity_psnr[l])) {
        out.metrics.per_disparity_psnr[l] += report.per_disparity_psnr[l];
        ++psnr_count[l];
      }
      if (std::isfinite(report.per_disparity_epe[l])) {
        out.metrics.per_disparity_epe[l] += report.per_disparity_epe[l];
        ++epe_count[l];
      }
    }
  }

  const double n = static_cast<double>(scenes.size());
  out.loss.total /= n;
  out.loss.disp /= n;
  out.loss.rgb /= n;
  out.metrics.psnr_db /= n;
  out.metrics.ssim /= n;
  out.metrics.epe_px /= n;
  out.metrics.bad3_pct /= n;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (size_t l = 0; l < levels; ++l) {
    out.metrics.per_disparity_psnr[l] =
        psnr_count[l] ? out.metrics.per_disparity_psnr[l] / psnr_count[l] : nan;
    out.metrics.per_disparity_epe[l] =
        epe_count[l] ? out.metrics.per_disparity_epe[l] / epe_count[l] : nan;
  }
  return out;
}

std::vector<double> coefficients_or_fit(const PhaseMask& mask, const ZernikeBasis& basis) {
  if (!mask.coefficients.empty()) {
    if (static_cast<int>(mask.coefficients.size()) != basis.count)
      throw ConfigError("mask coefficient count does not match the basis");
    return mask.coefficients;
  }
  return fit_coefficients(basis, mask.height_map);
}

double cosine_lr(double base, int iter, int total) {
  if (total <= 1) return base;
  return base * 0.5 * (1.0 + std::cos(M_PI * static_cast<double>(iter - 1) / total));
}

struct AdamState {
  std::vector<double> m, v;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  int t = 0;

  explicit AdamState(size_t n) : m(n, 0.0), v(n, 0.0) {}

  // Returns the L2 norm of the applied displacement. sign -1 descends,
  // +1 ascends. Index 0 (piston) never moves.
  double step(std::vector<double>& coeffs, const std::vector<double>& grad, double lr,
              double sign) {
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, t);
    const double bc2 = 1.0 - std::pow(beta2, t);
    double norm2 = 0.0;
    for (size_t j = 1; j < coeffs.size(); ++j) {
      m[j] = beta1 * m[j] + (1.0 - beta1) * grad[j];
      v[j] = beta2 * v[j] + (1.0 - beta2) * grad[j] * grad[j];
      const double delta = lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + eps);
      coeffs[j] += sign * delta;
      norm2 += delta * delta;
    }
    return std::sqrt(norm2);
  }
};

std::string format_gamma(double gamma) {
  if (gamma < 0.0) return "rgb-only";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", gamma);
  return buf;
}

}  // namespace

EvalResult evaluate_mask(const PhaseMask& mask, const std::vector<Scene>& scenes,
                         const OpticalConfig& config, const LossWeights& weights,
                         double sigma, uint64_t seed) {
  PsfStack stack = compute_psf_stack(mask, config);
  return evaluate_with_stack(stack, mask.provenance, scenes, config, weights, sigma, seed);
}

std::vector<double> fd_gradient(const PhaseMask& mask, const ZernikeBasis& basis,
                                double step, const std::vector<Scene>& scenes,
                                const OpticalConfig& config, const LossWeights& weights,
                                double sigma, uint64_t seed) {
  if (step <= 0.0) throw ConfigError("fd_gradient: step must be positive");
  if (mask.coefficients.empty())
    throw ConfigError("fd_gradient needs a coefficient-parameterized mask");
  if (static_cast<int>(mask.coefficients.size()) != basis.count)
    throw ConfigError("mask coefficient count does not match the basis");

  std::vector<double> grad(mask.coefficients.size(), 0.0);
  std::vector<double> probe = mask.coefficients;
  for (size_t j = 1; j < probe.size(); ++j) {
    const double base = probe[j];
    probe[j] = base + step;
    const double plus =
        evaluate_mask(mask_from_coefficients(basis, probe, mask.provenance), scenes,
                      config, weights, sigma, seed)
            .loss.total;
    probe[j] = base - step;
    const double minus =
        evaluate_mask(mask_from_coefficients(basis, probe, mask.provenance), scenes,
                      config, weights, sigma, seed)
            .loss.total;
    probe[j] = base;
    grad[j] = (plus - minus) / (2.0 * step);
  }
  return grad;
}

OptimizeReport optimize_mask(const PhaseMask& init, const std::vector<Scene>& scenes,
                             const OpticalConfig& config,
                             const OptimizeSettings& settings) {
  config.validate();
  settings.weights.validate();
  if (scenes.empty()) throw ConfigError("optimize_mask: empty scene list");
  if (settings.iterations < 1) throw ConfigError("optimize_mask: iterations must be >= 1");
  if (settings.lr <= 0.0) throw ConfigError("optimize_mask: lr must be positive");
  if (settings.fd_step <= 0.0) throw ConfigError("optimize_mask: fd_step must be positive");
  if (settings.batch_size < 1) throw ConfigError("optimize_mask: batch_size must be >= 1");
  if (settings.sigma < 0.0) throw ConfigError("optimize_mask: sigma must be >= 0");

  const ZernikeBasis basis = build_zernike_basis(config.mask_grid_size, kZernikeCount);
  std::vector<double> coeffs = coefficients_or_fit(init, basis);
  coeffs[0] = 0.0;

  // Fixed evaluation seed: logged losses stay comparable across iterations
  // (common random numbers), and best-so-far selection is apples to apples.
  const uint64_t eval_seed = Rng::derive(settings.seed, 0xE7A1);

  OptimizeReport report;
  report.config_snapshot = config;
  report.seed = settings.seed;

  PhaseMask current = mask_from_coefficients(basis, coeffs, "learned");
  report.initial_loss = evaluate_mask(current, scenes, config, settings.weights,
                                      settings.sigma, eval_seed)
                            .loss.total;
  report.best_loss = report.initial_loss;
  report.best_iteration = 0;
  std::vector<double> best_coeffs = coeffs;

  AdamState adam(coeffs.size());
  const int batch = std::min<int>(settings.batch_size, static_cast<int>(scenes.size()));
  report.iterations.reserve(settings.iterations);

  for (int t = 1; t <= settings.iterations; ++t) {
    std::vector<Scene> subset;
    subset.reserve(batch);
    for (int k = 0; k < batch; ++k) {
      const size_t idx =
          (static_cast<size_t>(t - 1) * batch + k) % scenes.size();
      subset.push_back(scenes[idx]);
    }

    // Probing at the evaluation seed keeps the objective deterministic, so
    // central differences read the optics instead of resampled noise; with
    // fresh noise per probe the gradient is dominated by realization error
    // and Adam's unit-scale steps turn that into a systematic drift.
    std::vector<double> grad = fd_gradient(current, basis, settings.fd_step, subset,
                                           config, settings.weights, settings.sigma,
                                           eval_seed);

    const double lr = cosine_lr(settings.lr, t, settings.iterations);
    const double step_l2 = adam.step(coeffs, grad, lr, -1.0);
    for (double c : coeffs) {
      if (!std::isfinite(c))
        throw NumericError("optimize_mask: non-finite coefficient at iteration " +
                           std::to_string(t));
    }
    current = mask_from_coefficients(basis, coeffs, "learned");

    EvalResult ev = evaluate_mask(current, scenes, config, settings.weights,
                                  settings.sigma, eval_seed);
    if (!std::isfinite(ev.loss.total)) {
      std::string diag = "optimize_mask: non-finite loss at iteration " + std::to_string(t) +
                         "; coefficients:";
      for (double c : coeffs) diag += " " + std::to_string(c);
      throw NumericError(diag);
    }

    IterationLog log;
    log.iter = t;
    log.loss = ev.loss.total;
    log.loss_disp = ev.loss.disp;
    log.loss_rgb = ev.loss.rgb;
    log.psnr_db = ev.metrics.psnr_db;
    log.epe_px = ev.metrics.epe_px;
    log.step_l2 = step_l2;
    log.lr = lr;
    report.iterations.push_back(log);

    if (ev.loss.total < report.best_loss) {
      report.best_loss = ev.loss.total;
      report.best_iteration = t;
      best_coeffs = coeffs;
    }
  }

  report.final_mask = mask_from_coefficients(basis, best_coeffs, "learned");
  return report;
}

PhaseMask make_fisher_mask(const OpticalConfig& config, int iterations, double lr,
                           double fd_step, uint64_t seed) {
  config.validate();
  if (iterations < 1) throw ConfigError("make_fisher_mask: iterations must be >= 1");
  if (lr <= 0.0) throw ConfigError("make_fisher_mask: lr must be positive");
  if (fd_step <= 0.0) throw ConfigError("make_fisher_mask: fd_step must be positive");

  const ZernikeBasis basis = build_zernike_basis(config.mask_grid_size, kZernikeCount);

  // A flat start is (near-)stationary: conjugating the pupil mirrors every
  // PSF, which the objective is almost blind to, so central differences
  // cancel. A small random offset breaks the symmetry.
  Rng rng(seed);
  std::vector<double> coeffs(basis.count, 0.0);
  for (size_t j = 1; j < coeffs.size(); ++j) coeffs[j] = rng.uniform(-10e-9, 10e-9);

  auto objective = [&](const std::vector<double>& c) {
    return fisher_objective(
        compute_psf_stack(mask_from_coefficients(basis, c, "fisher"), config), config);
  };

  double best_value = objective(coeffs);
  std::vector<double> best_coeffs = coeffs;

  AdamState adam(coeffs.size());
  std::vector<double> grad(coeffs.size(), 0.0);
  std::vector<double> probe = coeffs;
  for (int t = 1; t <= iterations; ++t) {
    probe = coeffs;
    for (size_t j = 1; j < coeffs.size(); ++j) {
      const double base = probe[j];
      probe[j] = base + fd_step;
      const double plus = objective(probe);
      probe[j] = base - fd_step;
      const double minus = objective(probe);
      probe[j] = base;
      grad[j] = (plus - minus) / (2.0 * fd_step);
    }
    adam.step(coeffs, grad, cosine_lr(lr, t, iterations), +1.0);
    for (double c : coeffs) {
      if (!std::isfinite(c))
        throw NumericError("make_fisher_mask: non-finite coefficient at iteration " +
                           std::to_string(t));
    }
    const double value = objective(coeffs);
    if (value > best_value) {
      best_value = value;
      best_coeffs = coeffs;
    }
  }
  return mask_from_coefficients(basis, best_coeffs, "fisher");
}

std::vector<double> fit_coefficients(const ZernikeBasis& basis, const Grid& height_map) {
  if (height_map.height() != basis.grid_size || height_map.width() != basis.grid_size)
    throw ConfigError("fit_coefficients: height map does not match the basis grid");

  const int n = basis.count;
  std::vector<size_t> samples;
  for (size_t i = 0; i < basis.in_disk.size(); ++i)
    if (basis.in_disk[i]) samples.push_back(i);

  // Normal equations over the in-disk samples; the sampled maps are close to
  // orthogonal, so plain Gaussian elimination with partial pivoting is fine.
  std::vector<double> ata(static_cast<size_t>(n) * n, 0.0);
  std::vector<double> atb(n, 0.0);
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      double dot = 0.0;
      for (size_t s : samples) dot += basis.maps[a][s] * basis.maps[b][s];
      ata[static_cast<size_t>(a) * n + b] = dot;
      ata[static_cast<size_t>(b) * n + a] = dot;
    }
    double dot = 0.0;
    for (size_t s : samples) dot += basis.maps[a][s] * height_map[s];
    atb[a] = dot;
  }

  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(ata[static_cast<size_t>(r) * n + col]) >
          std::abs(ata[static_cast<size_t>(pivot) * n + col]))
        pivot = r;
    if (std::abs(ata[static_cast<size_t>(pivot) * n + col]) < 1e-14)
      throw NumericError("fit_coefficients: singular normal equations");
    if (pivot != col) {
      for (int c = 0; c < n; ++c)
        std::swap(ata[static_cast<size_t>(pivot) * n + c],
                  ata[static_cast<size_t>(col) * n + c]);
      std::swap(atb[pivot], atb[col]);
    }
    const double inv = 1.0 / ata[static_cast<size_t>(col) * n + col];
    for (int r = col + 1; r < n; ++r) {
      const double f = ata[static_cast<size_t>(r) * n + col] * inv;
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c)
        ata[static_cast<size_t>(r) * n + c] -= f * ata[static_cast<size_t>(col) * n + c];
      atb[r] -= f * atb[col];
    }
  }
  std::vector<double> coeffs(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double acc = atb[r];
    for (int c = r + 1; c < n; ++c) acc -= ata[static_cast<size_t>(r) * n + c] * coeffs[c];
    coeffs[r] = acc / ata[static_cast<size_t>(r) * n + r];
  }
  return coeffs;
}

std::vector<MaskRow> compare_masks(
    const std::vector<std::pair<std::string, PhaseMask>>& masks,
    const std::vector<Scene>& scenes, const OpticalConfig& config,
    const LossWeights& weights, double sigma, uint64_t seed, double dof_threshold_db) {
  if (masks.empty()) throw ConfigError("compare_masks: empty mask list");
  config.validate();

  struct Row {
    std::string name;
    PhaseMask mask;
    OpticalConfig config;
    double sigma;
  };
  std::vector<Row> rows;
  rows.push_back({"flat-f8", make_flat_mask(config.mask_grid_size), config, sigma});
  OpticalConfig stopped = config;
  stopped.f_number = 32.0;
  NoiseReference ref;
  ref.f_number = config.f_number;
  ref.sigma = sigma;
  rows.push_back({"flat-f32", make_flat_mask(config.mask_grid_size), stopped,
                  noise_sigma_for(stopped.f_number, ref.exposure, ref.light, ref)});
  for (const auto& [name, mask] : masks) rows.push_back({name, mask, config, sigma});

  std::vector<MaskRow> out;
  out.reserve(rows.size());
  for (const Row& row : rows) {
    EvalResult ev =
        evaluate_mask(row.mask, scenes, row.config, weights, row.sigma, seed);
    MaskRow mr;
    mr.name = row.name;
    mr.sigma = row.sigma;
    mr.psnr_db = ev.metrics.psnr_db;
    mr.ssim = ev.metrics.ssim;
    mr.epe_px = ev.metrics.epe_px;
    mr.bad3_pct = ev.metrics.bad3_pct;
    mr.metrics = ev.metrics;
    out.push_back(std::move(mr));
  }

  double threshold = dof_threshold_db;
  if (threshold < 0.0) {
    // Calibrate to the conventional wide-open row: midpoint of its curve, so
    // "in focus" means the upper half of what the flat F8 lens achieves.
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : out[0].metrics.per_disparity_psnr) {
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    threshold = std::isfinite(lo) && std::isfinite(hi) ? 0.5 * (lo + hi) : 30.0;
  }
  const std::vector<double> levels = config.disparity_levels();
  for (size_t i = 0; i < out.size(); ++i)
    out[i].dof = dof_from_curve(out[i].metrics.per_disparity_psnr, levels,
                                threshold, rows[i].config);
  return out;
}

std::vector<GammaRow> gamma_ablation(const std::vector<double>& gammas,
                                     const PhaseMask& init,
                                     const std::vector<Scene>& scenes,
                                     const OpticalConfig& config,
                                     const OptimizeSettings& base_settings) {
  if (gammas.empty()) throw ConfigError("gamma_ablation: empty gamma list");

  const uint64_t eval_seed = Rng::derive(base_settings.seed, 0xE7A1);
  std::vector<GammaRow> out;
  out.reserve(gammas.size());
  for (double gamma : gammas) {
    OptimizeSettings settings = base_settings;
    if (gamma < 0.0) {
      settings.weights.alpha = {0.0, 0.0, 0.0};
      settings.weights.gamma = 1.0;
    } else {
      settings.weights.gamma = gamma;
    }
    OptimizeReport report = optimize_mask(init, scenes, config, settings);
    EvalResult ev = evaluate_mask(report.final_mask, scenes, config,
                                  base_settings.weights, settings.sigma, eval_seed);
    GammaRow row;
    row.label = format_gamma(gamma);
    row.gamma = gamma;
    row.psnr_db = ev.metrics.psnr_db;
    row.ssim = ev.metrics.ssim;
    row.epe_px = ev.metrics.epe_px;
    row.bad3_pct = ev.metrics.bad3_pct;
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace cs
