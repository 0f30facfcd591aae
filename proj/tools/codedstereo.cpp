#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "codedstereo/config.hpp"
#include "codedstereo/errors.hpp"
#include "codedstereo/geometry.hpp"
#include "codedstereo/manifest.hpp"
#include "codedstereo/mask_io.hpp"
#include "codedstereo/metrics.hpp"
#include "codedstereo/optimize.hpp"
#include "codedstereo/pfm.hpp"
#include "codedstereo/plot.hpp"
#include "codedstereo/png_io.hpp"
#include "codedstereo/render.hpp"
#include "codedstereo/rng.hpp"
#include "codedstereo/stereo.hpp"
#include "codedstereo/synth.hpp"
#include "codedstereo/wiener.hpp"

namespace fs = std::filesystem;
using namespace cs;

namespace {

constexpr const char* kVersion = "0.1.0";

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::string manifest;
  bool toy = false;
  std::string toy_size = "128x256";
  std::string crop;
  uint64_t crop_seed = 0;
  bool seed_set = false;
  uint64_t seed = 0;
  bool sigma_set = false;
  double sigma = 0.0;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_scenes) {
  cmd->add_option("--config", o.config_path, "INI config file ([optical]/[loss]/[run])");
  cmd->add_option("--out", o.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--seed", o.seed, "RNG seed (overrides config)")
      ->each([&o](const std::string&) { o.seed_set = true; });
  cmd->add_option("--sigma", o.sigma, "noise fraction (overrides config)")
      ->each([&o](const std::string&) { o.sigma_set = true; });
  if (with_scenes) {
    cmd->add_option("--manifest", o.manifest, "scene manifest file");
    cmd->add_flag("--toy", o.toy, "use built-in synthetic scenes instead of a manifest");
    cmd->add_option("--toy-size", o.toy_size, "toy scene size HxW")->capture_default_str();
    cmd->add_option("--crop", o.crop, "crop scenes to HxW");
    cmd->add_option("--crop-seed", o.crop_seed,
                    "nonzero: seeded crop positions instead of centered");
  }
}

RunConfig resolve_config(const CommonOpts& o) {
  RunConfig rc;
  if (!o.config_path.empty()) rc = load_config(o.config_path);
  if (o.seed_set) rc.seed = o.seed;
  if (o.sigma_set) rc.sigma = o.sigma;
  rc.optical.validate();
  return rc;
}

std::pair<int, int> parse_hw(const std::string& s, const char* what) {
  int h = 0, w = 0;
  char extra;
  if (std::sscanf(s.c_str(), "%dx%d%c", &h, &w, &extra) != 2 || h <= 0 || w <= 0)
    throw ConfigError(std::string(what) + ": expected HxW, got '" + s + "'");
  return {h, w};
}

std::vector<Scene> resolve_scenes(const CommonOpts& o, const RunConfig& rc) {
  if (o.toy && !o.manifest.empty())
    throw ConfigError("pass either --manifest or --toy, not both");
  if (o.toy) {
    auto [h, w] = parse_hw(o.toy_size, "--toy-size");
    return make_toy_scenes(h, w, rc.optical, rc.seed);
  }
  std::string manifest = !o.manifest.empty() ? o.manifest : rc.manifest_path;
  if (manifest.empty())
    throw ConfigError("no scenes: pass --manifest FILE or --toy");
  int ch = 0, cw = 0;
  if (!o.crop.empty()) std::tie(ch, cw) = parse_hw(o.crop, "--crop");
  ManifestResult result = load_scene_manifest(manifest, rc.optical, ch, cw, o.crop_seed);
  for (const auto& r : result.rejected)
    std::cerr << "warning: dropped scene " << r << "\n";
  return std::move(result.scenes);
}

PhaseMask resolve_mask(const std::string& spec, double alpha, int fisher_iterations,
                       const RunConfig& rc) {
  if (spec == "flat") return make_flat_mask(rc.optical.mask_grid_size);
  if (spec == "cubic") return make_cubic_mask(alpha, rc.optical);
  if (spec == "fisher")
    return make_fisher_mask(rc.optical, fisher_iterations, 50e-9, 20e-9, rc.seed);
  return read_mask(spec);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

struct RunRecord {
  std::string argv_line;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  void write(const fs::path& dir, const RunConfig& rc) const {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    char stamp[64] = "unknown";
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc;
    if (gmtime_r(&now, &tm_utc)) std::strftime(stamp, sizeof(stamp), "%FT%TZ", &tm_utc);
    std::string text;
    text += "command: " + argv_line + "\n";
    text += std::string("version: codedstereo ") + kVersion + "\n";
    text += "timestamp: " + std::string(stamp) + "\n";
    text += "seed: " + std::to_string(rc.seed) + "\n";
    text += "wall_seconds: " + csv_num(wall) + "\n";
    text += "config:\n";
    std::istringstream dump(dump_config(rc));
    for (std::string line; std::getline(dump, line);) text += "  " + line + "\n";
    write_text(dir / "run.txt", text);
  }
};

fs::path prepare_out(const CommonOpts& o) {
  fs::path dir(o.out_dir);
  fs::create_directories(dir);
  return dir;
}

const char* channel_name(int c) { return c == 0 ? "r" : c == 1 ? "g" : "b"; }

// ---------------------------------------------------------------- psf

struct PsfOpts {
  CommonOpts common;
  std::string mask = "flat";
  double alpha = 30.0;
  int fisher_iterations = 20;
};

int run_psf(const PsfOpts& o, const RunRecord& record) {
  RunConfig rc = resolve_config(o.common);
  const fs::path dir = prepare_out(o.common);
  PhaseMask mask = resolve_mask(o.mask, o.alpha, o.fisher_iterations, rc);
  PsfStack stack = compute_psf_stack(mask, rc.optical);
  const std::vector<double>& levels = stack.levels;

  std::string csv = "channel,level,disparity,sum,centroid_dx_px,centroid_dy_px,std_radius_px\n";
  for (int c = 0; c < 3; ++c) {
    for (size_t l = 0; l < levels.size(); ++l) {
      const Grid& k = stack.kernel(c, static_cast<int>(l));
      const double center = k.height() / 2;
      double sum = 0, cx = 0, cy = 0;
      for (int y = 0; y < k.height(); ++y)
        for (int x = 0; x < k.width(); ++x) {
          sum += k(y, x);
          cx += k(y, x) * (x - center);
          cy += k(y, x) * (y - center);
        }
      cx /= sum;
      cy /= sum;
      double var = 0;
      for (int y = 0; y < k.height(); ++y)
        for (int x = 0; x < k.width(); ++x) {
          const double dx = x - center - cx, dy = y - center - cy;
          var += k(y, x) * (dx * dx + dy * dy);
        }
      csv += std::string(channel_name(c)) + "," + std::to_string(l) + "," +
             csv_num(levels[l]) + "," + csv_num(sum) + "," + csv_num(cx) + "," +
             csv_num(cy) + "," + csv_num(std::sqrt(var / sum)) + "\n";

      const double peak = grid_max(k);
      Grid scaled(k.height(), k.width());
      for (size_t i = 0; i < k.size(); ++i) scaled[i] = peak > 0 ? k[i] / peak : 0.0;
      char name[64];
      std::snprintf(name, sizeof(name), "kernel_%s_%02zu.png", channel_name(c), l);
      write_png_gray((dir / name).string(), scaled, 16);
    }
  }
  write_text(dir / "moments.csv", csv);
  if (!mask.height_map.empty()) write_mask((dir / "mask.txt").string(), mask);
  record.write(dir, rc);
  std::cout << "wrote " << 3 * levels.size() << " kernels to " << dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- render

struct RenderOpts {
  CommonOpts common;
  std::string mask = "flat";
  double alpha = 30.0;
  int fisher_iterations = 20;
};

int run_render(const RenderOpts& o, const RunRecord& record) {
  RunConfig rc = resolve_config(o.common);
  const fs::path dir = prepare_out(o.common);
  PhaseMask mask = resolve_mask(o.mask, o.alpha, o.fisher_iterations, rc);
  std::vector<Scene> scenes = resolve_scenes(o.common, rc);
  PsfStack stack = compute_psf_stack(mask, rc.optical);

  std::string csv = "scene,sigma\n";
  for (size_t i = 0; i < scenes.size(); ++i) {
    CodedPair pair = render_stereo_pair_with_stack(
        scenes[i], stack, rc.optical, rc.sigma, Rng::derive(rc.seed, i), mask.provenance);
    write_png((dir / (scenes[i].id + "_coded_left.png")).string(), pair.coded_left);
    write_png((dir / (scenes[i].id + "_coded_right.png")).string(), pair.coded_right);
    csv += scenes[i].id + "," + csv_num(pair.noise_sigma) + "\n";
  }
  write_text(dir / "render.csv", csv);
  record.write(dir, rc);
  std::cout << "rendered " << scenes.size() << " coded pairs to " << dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- stereo

struct StereoOpts {
  CommonOpts common;
  std::string mask = "flat";
  double alpha = 30.0;
  int fisher_iterations = 20;
  int block_radius = 8;
};

int run_stereo(const StereoOpts& o, const RunRecord& record) {
  RunConfig rc = resolve_config(o.common);
  const fs::path dir = prepare_out(o.common);
  PhaseMask mask = resolve_mask(o.mask, o.alpha, o.fisher_iterations, rc);
  std::vector<Scene> scenes = resolve_scenes(o.common, rc);
  PsfStack stack = compute_psf_stack(mask, rc.optical);

  std::string csv = "scene,epe_px,bad3_pct\n";
  for (size_t i = 0; i < scenes.size(); ++i) {
    CodedPair pair = render_stereo_pair_with_stack(
        scenes[i], stack, rc.optical, rc.sigma, Rng::derive(rc.seed, i), mask.provenance);
    StereoResult res =
        match_stereo(pair.coded_left, pair.coded_right, rc.optical, o.block_radius);
    write_pfm((dir / (scenes[i].id + "_disp.pfm")).string(), res.disparity);
    write_pfm((dir / (scenes[i].id + "_disp_right.pfm")).string(), res.disparity_right);
    write_pfm((dir / (scenes[i].id + "_conf.pfm")).string(), res.confidence);
    csv += scenes[i].id + "," + csv_num(epe(res.disparity, scenes[i].disparity_left)) +
           "," + csv_num(bad3(res.disparity, scenes[i].disparity_left)) + "\n";
  }
  write_text(dir / "stereo.csv", csv);
  record.write(dir, rc);
  std::cout << "matched " << scenes.size() << " pairs, results in " << dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- recon

struct ReconOpts {
  CommonOpts common;
  std::string mask = "flat";
  double alpha = 30.0;
  int fisher_iterations = 20;
  std::string mode = "layered";
  double nsr = -1.0;
};

int run_recon(const ReconOpts& o, const RunRecord& record) {
  RunConfig rc = resolve_config(o.common);
  const fs::path dir = prepare_out(o.common);
  if (o.mode != "layered" && o.mode != "single")
    throw ConfigError("--mode must be 'layered' or 'single'");
  PhaseMask mask = resolve_mask(o.mask, o.alpha, o.fisher_iterations, rc);
  std::vector<Scene> scenes = resolve_scenes(o.common, rc);
  PsfStack stack = compute_psf_stack(mask, rc.optical);
  const EdofMode mode = o.mode == "layered" ? EdofMode::kLayered : EdofMode::kSingle;

  std::string csv = "scene,psnr_db,ssim,epe_px,bad3_pct\n";
  for (size_t i = 0; i < scenes.size(); ++i) {
    const Scene& scene = scenes[i];
    CodedPair pair = render_stereo_pair_with_stack(
        scene, stack, rc.optical, rc.sigma, Rng::derive(rc.seed, i), mask.provenance);
    StereoResult res = match_stereo(pair.coded_left, pair.coded_right, rc.optical);
    auto [left, right] =
        edof_reconstruct(pair, stack, mode, &res.disparity, &res.disparity_right, o.nsr,
                         rc.optical);
    write_png((dir / (scene.id + "_edof_left.png")).string(), left);
    write_png((dir / (scene.id + "_edof_right.png")).string(), right);
    MetricReport m = evaluate_metrics(left, right, scene.texture_left, scene.texture_right,
                                      res.disparity, scene.disparity_left, rc.optical);
    csv += scene.id + "," + csv_num(m.psnr_db) + "," + csv_num(m.ssim) + "," +
           csv_num(m.epe_px) + "," + csv_num(m.bad3_pct) + "\n";
  }
  write_text(dir / "recon.csv", csv);
  record.write(dir, rc);
  std::cout << "reconstructed " << scenes.size() << " scenes to " << dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- optimize

struct OptimizeOpts {
  CommonOpts common;
  std::string init = "flat";
  double alpha = 30.0;
  int iterations = 50;
  double lr = 20e-9;
  double fd_step = 20e-9;
  int batch = 2;
  bool gamma_set = false;
  double gamma = 0.5;
  std::vector<double> alpha_weights;
  bool randomize_init = false;
};

int run_optimize(const OptimizeOpts& o, const RunRecord& record) {
  RunConfig rc = resolve_config(o.common);
  const fs::path dir = prepare_out(o.common);
  std::vector<Scene> scenes = resolve_scenes(o.common, rc);
  PhaseMask init = resolve_mask(o.init, o.alpha, 20, rc);
  if (o.randomize_init) {
    const ZernikeBasis basis =
        build_zernike_basis(rc.optical.mask_grid_size, kZernikeCount);
    std::vector<double> coeffs(kZernikeCount, 0.0);
    Rng rng(Rng::derive(rc.seed, 0x1217));
    for (size_t j = 1; j < coeffs.size(); ++j) coeffs[j] = rng.uniform(-20e-9, 20e-9);
    init = mask_from_coefficients(basis, coeffs, "learned");
  }

  OptimizeSettings settings;
  settings.iterations = o.iterations;
  settings.lr = o.lr;
  settings.fd_step = o.fd_step;
  settings.batch_size = o.batch;
  settings.sigma = rc.sigma;
  settings.seed = rc.seed;
  settings.weights = rc.weights;
  if (o.gamma_set) settings.weights.gamma = o.gamma;
  if (!o.alpha_weights.empty()) {
    if (o.alpha_weights.size() != 3) throw ConfigError("--alpha-weights needs 3 values");
    for (int i = 0; i < 3; ++i) settings.weights.alpha[i] = o.alpha_weights[i];
  }

  OptimizeReport report = optimize_mask(init, scenes, rc.optical, settings);

  write_mask((dir / "learned_mask.txt").string(), report.final_mask);
  std::string csv = "iter,loss,loss_disp,loss_rgb,psnr_db,epe_px,step_l2,lr\n";
  PlotSeries total{{}, {}, "LOSS"}, disp{{}, {}, "DISP"}, rgb{{}, {}, "RGB"};
  total.x.push_back(0);
  total.y.push_back(report.initial_loss);
  for (const IterationLog& it : report.iterations) {
    csv += std::to_string(it.iter) + "," + csv_num(it.loss) + "," + csv_num(it.loss_disp) +
           "," + csv_num(it.loss_rgb) + "," + csv_num(it.psnr_db) + "," +
           csv_num(it.epe_px) + "," + csv_num(it.step_l2) + "," + csv_num(it.lr) + "\n";
    total.x.push_back(it.iter);
    total.y.push_back(it.loss);
    disp.x.push_back(it.iter);
    disp.y.push_back(it.loss_disp);
    rgb.x.push_back(it.iter);
    rgb.y.push_back(it.loss_rgb);
  }
  write_text(dir / "history.csv", csv);
  write_line_plot((dir / "loss_curve.png").string(), {total, disp, rgb},
                  "combined loss per iteration", "iteration", "loss");
  record.write(dir, rc);
  std::printf("loss %.6f -> %.6f (best at iteration %d), mask in %s\n",
              report.initial_loss, report.best_loss, report.best_iteration,
              (dir / "learned_mask.txt").string().c_str());
  return 0;
}

// ---------------------------------------------------------------- tradeoff

struct TradeoffOpts {
  CommonOpts common;
  double snr = 50.0;
  std::string exposures = "1:16:16";
  double coc_px = 1.0;
};

int run_tradeoff(const TradeoffOpts& o, const RunRecord& record) {
  RunConfig rc = resolve_config(o.common);
  const fs::path dir = prepare_out(o.common);

  double lo = 0, hi = 0;
  int n = 0;
  char extra;
  if (std::sscanf(o.exposures.c_str(), "%lf:%lf:%d%c", &lo, &hi, &n, &extra) != 3 ||
      n < 2 || lo <= 0 || hi <= lo)
    throw ConfigError("--exposures expects lo:hi:count with 0 < lo < hi, count >= 2");
  std::vector<double> exposures(n);
  for (int i = 0; i < n; ++i) exposures[i] = lo + (hi - lo) * i / (n - 1);

  const double coc = o.coc_px * rc.optical.sensor_pixel_pitch;
  std::vector<TradeoffPoint> curve = tradeoff_curve(rc.optical, o.snr, exposures, coc);

  std::string csv = "exposure_s,f_number,snr_db,dof_near_m,dof_far_m,dof_m,dof_approx_m\n";
  PlotSeries dof{{}, {}, "DOF M"}, approx{{}, {}, "APPROX"};
  for (const TradeoffPoint& p : curve) {
    csv += csv_num(p.exposure_s) + "," + csv_num(p.f_number) + "," + csv_num(p.snr_db) +
           "," + csv_num(p.dof.near_m) + "," + csv_num(p.dof.far_m) + "," +
           csv_num(p.dof.dof_m) + "," + csv_num(p.dof.approx_m) + "\n";
    if (std::isfinite(p.dof.dof_m)) {
      dof.x.push_back(p.exposure_s);
      dof.y.push_back(p.dof.dof_m);
    }
    approx.x.push_back(p.exposure_s);
    approx.y.push_back(p.dof.approx_m);
  }
  write_text(dir / "tradeoff.csv", csv);
  write_line_plot((dir / "tradeoff.png").string(), {dof, approx},
                  "depth of field at equal snr", "exposure (s)", "dof (m)");
  record.write(dir, rc);
  std::cout << "tradeoff curve (" << curve.size() << " points) in " << dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOpts {
  CommonOpts common;
  std::vector<std::string> masks;  // name=spec
  double alpha = 30.0;
  int fisher_iterations = 20;
  double dof_threshold = -1.0;
  std::vector<std::string> ablation_gammas;
  std::string ablation_init = "flat";
  int iterations = 20;
  double lr = 20e-9;
  double fd_step = 20e-9;
  int batch = 2;
};

std::string pad_to(const std::string& s, size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

int run_evaluate(const EvaluateOpts& o, const RunRecord& record) {
  RunConfig rc = resolve_config(o.common);
  const fs::path dir = prepare_out(o.common);
  std::vector<Scene> scenes = resolve_scenes(o.common, rc);

  std::vector<std::pair<std::string, PhaseMask>> masks;
  if (o.masks.empty()) {
    masks.emplace_back("cubic-a30", make_cubic_mask(o.alpha, rc.optical));
  } else {
    for (const std::string& spec : o.masks) {
      const size_t eq = spec.find('=');
      if (eq == std::string::npos || eq == 0)
        throw ConfigError("--mask expects name=spec, got '" + spec + "'");
      masks.emplace_back(spec.substr(0, eq),
                         resolve_mask(spec.substr(eq + 1), o.alpha, o.fisher_iterations,
                                      rc));
    }
  }

  std::vector<MaskRow> rows = compare_masks(masks, scenes, rc.optical, rc.weights,
                                            rc.sigma, rc.seed, o.dof_threshold);

  const double base_span = rows[0].dof.disparity_span;
  std::string csv =
      "mask,sigma,psnr_db,ssim,epe_px,bad3_pct,dof_disparity_span,dof_depth_span_m,"
      "dof_ratio_vs_flat_f8\n";
  std::string txt = pad_to("mask", 14) + pad_to("sigma", 9) + pad_to("psnr", 8) +
                    pad_to("ssim", 8) + pad_to("epe", 8) + pad_to("3px%", 8) +
                    pad_to("dof(px)", 9) + pad_to("dof(m)", 9) + "dof/flat-f8\n";
  for (const MaskRow& r : rows) {
    const double ratio = base_span > 0 ? r.dof.disparity_span / base_span : 0.0;
    csv += r.name + "," + csv_num(r.sigma) + "," + csv_num(r.psnr_db) + "," +
           csv_num(r.ssim) + "," + csv_num(r.epe_px) + "," + csv_num(r.bad3_pct) + "," +
           csv_num(r.dof.disparity_span) + "," + csv_num(r.dof.depth_span_m) + "," +
           csv_num(ratio) + "\n";
    char line[256];
    std::snprintf(line, sizeof(line), "%-14s%-9.4g%-8.2f%-8.4f%-8.3f%-8.2f%-9.4g%-9.4g%.2f\n",
                  r.name.c_str(), r.sigma, r.psnr_db, r.ssim, r.epe_px, r.bad3_pct,
                  r.dof.disparity_span, r.dof.depth_span_m, ratio);
    txt += line;
  }
  write_text(dir / "comparison.csv", csv);
  write_text(dir / "comparison.txt", txt);
  std::cout << txt;

  const std::vector<double> levels = rc.optical.disparity_levels();
  for (const char* which : {"psnr", "epe"}) {
    std::string curve_csv = "mask";
    for (double l : levels) curve_csv += "," + csv_num(l);
    curve_csv += "\n";
    std::vector<PlotSeries> series;
    for (const MaskRow& r : rows) {
      const auto& c = std::string(which) == "psnr" ? r.metrics.per_disparity_psnr
                                                   : r.metrics.per_disparity_epe;
      curve_csv += r.name;
      PlotSeries s{{}, {}, r.name};
      for (size_t l = 0; l < c.size(); ++l) {
        curve_csv += "," + csv_num(c[l]);
        s.x.push_back(levels[l]);
        s.y.push_back(c[l]);
      }
      curve_csv += "\n";
      series.push_back(std::move(s));
    }
    write_text(dir / (std::string("per_disparity_") + which + ".csv"), curve_csv);
    write_line_plot((dir / (std::string("per_disparity_") + which + ".png")).string(),
                    series, std::string(which) + " per disparity level", "disparity (px)",
                    which);
  }

  if (!o.ablation_gammas.empty()) {
    std::vector<double> gammas;
    for (const std::string& g : o.ablation_gammas) {
      if (g == "rgb-only") {
        gammas.push_back(-1.0);
      } else {
        char* end = nullptr;
        const double v = std::strtod(g.c_str(), &end);
        if (end == g.c_str() || *end != '\0' || v < 0)
          throw ConfigError("--ablation-gammas: expected numbers >= 0 or 'rgb-only'");
        gammas.push_back(v);
      }
    }
    OptimizeSettings settings;
    settings.iterations = o.iterations;
    settings.lr = o.lr;
    settings.fd_step = o.fd_step;
    settings.batch_size = o.batch;
    settings.sigma = rc.sigma;
    settings.seed = rc.seed;
    settings.weights = rc.weights;
    PhaseMask init = resolve_mask(o.ablation_init, o.alpha, o.fisher_iterations, rc);
    std::vector<GammaRow> table =
        gamma_ablation(gammas, init, scenes, rc.optical, settings);

    std::string acsv = "gamma,psnr_db,ssim,epe_px,bad3_pct\n";
    std::string atxt = pad_to("gamma", 10) + pad_to("psnr", 8) + pad_to("ssim", 8) +
                       pad_to("epe", 8) + "3px%\n";
    for (const GammaRow& r : table) {
      acsv += r.label + "," + csv_num(r.psnr_db) + "," + csv_num(r.ssim) + "," +
              csv_num(r.epe_px) + "," + csv_num(r.bad3_pct) + "\n";
      char line[160];
      std::snprintf(line, sizeof(line), "%-10s%-8.2f%-8.4f%-8.3f%.2f\n", r.label.c_str(),
                    r.psnr_db, r.ssim, r.epe_px, r.bad3_pct);
      atxt += line;
    }
    write_text(dir / "ablation.csv", acsv);
    write_text(dir / "ablation.txt", atxt);
    std::cout << atxt;
  }

  record.write(dir, rc);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coded-aperture stereo simulation and phase-mask optimization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("codedstereo ") + kVersion);

  PsfOpts psf;
  auto* psf_cmd = app.add_subcommand("psf", "compute the PSF stack of a mask");
  add_common(psf_cmd, psf.common, false);
  psf_cmd->add_option("--mask", psf.mask, "flat | cubic | fisher | mask file")
      ->capture_default_str();
  psf_cmd->add_option("--alpha", psf.alpha, "cubic mask strength (waves)")
      ->capture_default_str();
  psf_cmd->add_option("--fisher-iterations", psf.fisher_iterations, "")
      ->capture_default_str();

  RenderOpts render;
  auto* render_cmd = app.add_subcommand("render", "render coded stereo pairs");
  add_common(render_cmd, render.common, true);
  render_cmd->add_option("--mask", render.mask, "flat | cubic | fisher | mask file")
      ->capture_default_str();
  render_cmd->add_option("--alpha", render.alpha, "")->capture_default_str();
  render_cmd->add_option("--fisher-iterations", render.fisher_iterations, "")
      ->capture_default_str();

  StereoOpts stereo;
  auto* stereo_cmd = app.add_subcommand("stereo", "render then estimate disparity");
  add_common(stereo_cmd, stereo.common, true);
  stereo_cmd->add_option("--mask", stereo.mask, "")->capture_default_str();
  stereo_cmd->add_option("--alpha", stereo.alpha, "")->capture_default_str();
  stereo_cmd->add_option("--fisher-iterations", stereo.fisher_iterations, "")
      ->capture_default_str();
  stereo_cmd->add_option("--block-radius", stereo.block_radius, "ZNCC window radius")
      ->capture_default_str();

  ReconOpts recon;
  auto* recon_cmd = app.add_subcommand("recon", "render then recover all-in-focus texture");
  add_common(recon_cmd, recon.common, true);
  recon_cmd->add_option("--mask", recon.mask, "")->capture_default_str();
  recon_cmd->add_option("--alpha", recon.alpha, "")->capture_default_str();
  recon_cmd->add_option("--fisher-iterations", recon.fisher_iterations, "")
      ->capture_default_str();
  recon_cmd->add_option("--mode", recon.mode, "layered | single")->capture_default_str();
  recon_cmd->add_option("--nsr", recon.nsr, "Wiener NSR, negative = auto")
      ->capture_default_str();

  OptimizeOpts optimize;
  auto* optimize_cmd = app.add_subcommand("optimize", "optimize mask coefficients");
  add_common(optimize_cmd, optimize.common, true);
  optimize_cmd->add_option("--init", optimize.init, "flat | cubic | mask file")
      ->capture_default_str();
  optimize_cmd->add_option("--alpha", optimize.alpha, "")->capture_default_str();
  optimize_cmd->add_option("--iterations", optimize.iterations, "")->capture_default_str();
  optimize_cmd->add_option("--lr", optimize.lr, "Adam learning rate (m)")
      ->capture_default_str();
  optimize_cmd->add_option("--fd-step", optimize.fd_step, "finite-difference step (m)")
      ->capture_default_str();
  optimize_cmd->add_option("--batch", optimize.batch, "scenes per iteration")
      ->capture_default_str();
  optimize_cmd->add_option("--gamma", optimize.gamma, "RGB loss weight")
      ->each([&optimize](const std::string&) { optimize.gamma_set = true; });
  optimize_cmd->add_option("--alpha-weights", optimize.alpha_weights,
                           "three disparity pyramid weights");
  optimize_cmd->add_flag("--randomize-init", optimize.randomize_init,
                         "start from small random coefficients instead of --init");

  TradeoffOpts tradeoff;
  auto* tradeoff_cmd =
      app.add_subcommand("tradeoff", "equal-SNR aperture/exposure vs depth of field");
  add_common(tradeoff_cmd, tradeoff.common, false);
  tradeoff_cmd->add_option("--snr", tradeoff.snr, "target SNR in dB")
      ->capture_default_str();
  tradeoff_cmd->add_option("--exposures", tradeoff.exposures, "lo:hi:count seconds")
      ->capture_default_str();
  tradeoff_cmd->add_option("--coc-px", tradeoff.coc_px,
                           "acceptable blur circle in pixels")
      ->capture_default_str();

  EvaluateOpts evaluate;
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "comparison tables against flat-lens baselines");
  add_common(evaluate_cmd, evaluate.common, true);
  evaluate_cmd->add_option("--mask", evaluate.masks,
                           "name=spec rows (spec: flat|cubic|fisher|file), repeatable");
  evaluate_cmd->add_option("--alpha", evaluate.alpha, "")->capture_default_str();
  evaluate_cmd->add_option("--fisher-iterations", evaluate.fisher_iterations, "")
      ->capture_default_str();
  evaluate_cmd->add_option("--dof-threshold", evaluate.dof_threshold,
                           "PSNR threshold in dB, negative = auto-calibrated")
      ->capture_default_str();
  evaluate_cmd->add_option("--ablation-gammas", evaluate.ablation_gammas,
                           "gamma values (or 'rgb-only') to optimize and tabulate");
  evaluate_cmd->add_option("--ablation-init", evaluate.ablation_init, "")
      ->capture_default_str();
  evaluate_cmd->add_option("--iterations", evaluate.iterations, "ablation iterations")
      ->capture_default_str();
  evaluate_cmd->add_option("--lr", evaluate.lr, "")->capture_default_str();
  evaluate_cmd->add_option("--fd-step", evaluate.fd_step, "")->capture_default_str();
  evaluate_cmd->add_option("--batch", evaluate.batch, "")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  RunRecord record;
  for (int i = 0; i < argc; ++i) {
    if (i) record.argv_line += ' ';
    record.argv_line += argv[i];
  }

  try {
    if (psf_cmd->parsed()) return run_psf(psf, record);
    if (render_cmd->parsed()) return run_render(render, record);
    if (stereo_cmd->parsed()) return run_stereo(stereo, record);
    if (recon_cmd->parsed()) return run_recon(recon, record);
    if (optimize_cmd->parsed()) return run_optimize(optimize, record);
    if (tradeoff_cmd->parsed()) return run_tradeoff(tradeoff, record);
    if (evaluate_cmd->parsed()) return run_evaluate(evaluate, record);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
