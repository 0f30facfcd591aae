#include <doctest.h>

#include <cmath>
#include <vector>

#include "codedstereo/errors.hpp"
#include "codedstereo/render.hpp"
#include "codedstereo/synth.hpp"

using namespace cs;

namespace {

double max_abs_diff(const Grid& a, const Grid& b) {
  REQUIRE(a.same_shape(b));
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs_diff(const Image& a, const Image& b) {
  double m = 0.0;
  for (int c = 0; c < 3; ++c) m = std::max(m, max_abs_diff(a[c], b[c]));
  return m;
}

// PSF stack whose kernels are identity taps, so layered rendering reduces to
// plain matting.
PsfStack identity_stack(const OpticalConfig& config) {
  PsfStack stack;
  stack.levels = config.disparity_levels();
  Grid k(config.psf_kernel_size, config.psf_kernel_size, 0.0);
  k(config.psf_kernel_size / 2, config.psf_kernel_size / 2) = 1.0;
  stack.kernels.assign(3 * stack.levels.size(), k);
  return stack;
}

}  // namespace

TEST_CASE("quantize_disparity assigns nearest level, ties to the lower") {
  OpticalConfig cfg;
  Grid disp(1, 6);
  disp[0] = 0.0;
  disp[1] = 4.7;    // below the 4.8 midpoint -> level 0
  disp[2] = 4.8;    // exactly midway -> still level 0
  disp[3] = 4.81;   // past midway -> level 1 (9.6)
  disp[4] = 192.0;
  disp[5] = 95.9;   // nearest of {86.4, 96.0} -> level 10

  const LayerMasks lm = quantize_disparity(disp, cfg);
  REQUIRE(lm.masks.size() == 21);
  REQUIRE(lm.levels.size() == 21);
  CHECK(lm.clamped == 0);

  CHECK(lm.masks[0](0, 0) == 1.0);
  CHECK(lm.masks[0](0, 1) == 1.0);
  CHECK(lm.masks[0](0, 2) == 1.0);
  CHECK(lm.masks[1](0, 3) == 1.0);
  CHECK(lm.masks[20](0, 4) == 1.0);
  CHECK(lm.masks[10](0, 5) == 1.0);

  // Binary masks partitioning the image: exactly one layer per pixel.
  for (int x = 0; x < 6; ++x) {
    double total = 0.0;
    for (const Grid& m : lm.masks) {
      const double v = m(0, x);
      CHECK((v == 0.0 || v == 1.0));
      total += v;
    }
    CHECK(total == 1.0);
  }
}

TEST_CASE("quantize_disparity clamps and counts out-of-range pixels") {
  OpticalConfig cfg;
  Grid disp(1, 4);
  disp[0] = -3.0;
  disp[1] = 200.0;
  disp[2] = 96.0;
  disp[3] = 191.99;

  const LayerMasks lm = quantize_disparity(disp, cfg);
  CHECK(lm.clamped == 2);
  CHECK(lm.masks[0](0, 0) == 1.0);
  CHECK(lm.masks[20](0, 1) == 1.0);
  CHECK(lm.masks[10](0, 2) == 1.0);
  CHECK(lm.masks[20](0, 3) == 1.0);
}

TEST_CASE("layered rendering preserves flat fields") {
  OpticalConfig cfg;
  const PhaseMask mask = make_flat_mask(cfg.mask_grid_size);
  const PsfStack stack = compute_psf_stack(mask, cfg);

  const int h = 96, w = 200;
  Image tex(h, w, 0.5);
  Grid disp(h, w, 48.0);
  const LayerMasks lm = quantize_disparity(disp, cfg);
  const Image out = render_coded_image(tex, lm, stack);

  for (int c = 0; c < 3; ++c) {
    CHECK(grid_min(out[c]) > 0.5 - 1e-4);
    CHECK(grid_max(out[c]) < 0.5 + 1e-4);
  }
}

TEST_CASE("layered rendering is linear in the texture") {
  OpticalConfig cfg;
  const PsfStack stack = compute_psf_stack(make_flat_mask(cfg.mask_grid_size), cfg);

  const Scene scene = make_plane_scene(80, 220, {19.2, 96.0}, 11, "lin");
  const LayerMasks lm = quantize_disparity(scene.disparity_left, cfg);

  const Image once = render_coded_image(scene.texture_left, lm, stack);
  Image doubled = scene.texture_left;
  for (int c = 0; c < 3; ++c)
    for (size_t i = 0; i < doubled[c].size(); ++i) doubled[c][i] *= 2.0;
  const Image twice = render_coded_image(doubled, lm, stack);

  double worst = 0.0;
  for (int c = 0; c < 3; ++c)
    for (size_t i = 0; i < once[c].size(); ++i)
      worst = std::max(worst, std::abs(twice[c][i] - 2.0 * once[c][i]));
  CHECK(worst < 1e-6);
}

TEST_CASE("identity kernels make layered rendering a no-op") {
  OpticalConfig cfg;
  const PsfStack stack = identity_stack(cfg);
  const Scene scene = make_plane_scene(72, 200, {9.6, 144.0}, 5, "ident");
  const LayerMasks lm = quantize_disparity(scene.disparity_left, cfg);
  const Image out = render_coded_image(scene.texture_left, lm, stack);
  CHECK(max_abs_diff(out, scene.texture_left) < 1e-9);
}

TEST_CASE("preshift_right translates with edge replication") {
  OpticalConfig cfg;  // preshift 134
  const int w = 300;
  Grid g(2, w);
  for (int x = 0; x < w; ++x) {
    g(0, x) = x;
    g(1, x) = 1000 + x;
  }

  // Content moves right by the pre-shift, so a raw right-view pixel at
  // x - d_raw lands at x - (d_raw - preshift).
  const Grid shifted = preshift_right(g, cfg, false);
  REQUIRE(shifted.width() == w);
  CHECK(shifted(0, 234) == 100.0);
  CHECK(shifted(0, 0) == 0.0);    // replicated left edge
  CHECK(shifted(0, 133) == 0.0);
  CHECK(shifted(0, w - 1) == w - 1.0 - 134.0);
  CHECK(shifted(1, 200) == 1066.0);

  // Disparity maps additionally drop to the reduced convention.
  Grid raw(2, w, 150.0);
  const Grid reduced = preshift_right(raw, cfg, true);
  CHECK(grid_min(reduced) == 16.0);
  CHECK(grid_max(reduced) == 16.0);

  Grid narrow(2, 100, 0.0);
  CHECK_THROWS_AS(preshift_right(narrow, cfg, false), DomainError);
}

TEST_CASE("add_noise is seeded, scaled, and clipped") {
  Grid clean(64, 64, 0.5);

  const Grid a = add_noise(clean, 0.05, 42);
  const Grid b = add_noise(clean, 0.05, 42);
  CHECK(max_abs_diff(a, b) == 0.0);
  const Grid c = add_noise(clean, 0.05, 43);
  CHECK(max_abs_diff(a, c) > 0.0);

  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - 0.5;
    acc += d * d;
  }
  CHECK(std::sqrt(acc / a.size()) == doctest::Approx(0.05).epsilon(0.05));

  CHECK(max_abs_diff(add_noise(clean, 0.0, 7), clean) == 0.0);

  Grid bright(32, 32, 0.99);
  const Grid clipped = add_noise(bright, 0.3, 9);
  CHECK(grid_max(clipped) <= 1.0);
  CHECK(grid_min(clipped) >= 0.0);

  CHECK_THROWS_AS(add_noise(clean, -0.1, 1), DomainError);

  // The image overload decorrelates channels.
  Image img(16, 16, 0.5);
  const Image noisy = add_noise(img, 0.05, 3);
  CHECK(max_abs_diff(noisy[0], noisy[1]) > 0.0);
}

TEST_CASE("noise_sigma_for scales with collected light") {
  const NoiseReference ref;
  CHECK(noise_sigma_for(8.0, 1.0, 1.0, ref) == doctest::Approx(0.02));
  // Stopping down to F32 at equal exposure costs 16x the noise fraction.
  CHECK(noise_sigma_for(32.0, 1.0, 1.0, ref) == doctest::Approx(0.32));
  CHECK(noise_sigma_for(8.0, 2.0, 1.0, ref) == doctest::Approx(0.01));
  CHECK(noise_sigma_for(8.0, 1.0, 4.0, ref) == doctest::Approx(0.005));
  CHECK(noise_sigma_for(16.0, 4.0, 1.0, ref) == doctest::Approx(0.02));
  CHECK_THROWS_AS(noise_sigma_for(0.0, 1.0, 1.0, ref), DomainError);
}

TEST_CASE("stereo pair rendering is deterministic and stack-consistent") {
  OpticalConfig cfg;
  const PhaseMask mask = make_flat_mask(cfg.mask_grid_size);
  const Scene scene = make_plane_scene(72, 220, {38.4, 105.6}, 21, "pair");

  const CodedPair p1 = render_stereo_pair(scene, mask, cfg, 0.02, 77);
  const CodedPair p2 = render_stereo_pair(scene, mask, cfg, 0.02, 77);
  CHECK(max_abs_diff(p1.coded_left, p2.coded_left) == 0.0);
  CHECK(max_abs_diff(p1.coded_right, p2.coded_right) == 0.0);
  CHECK(p1.noise_sigma == 0.02);
  CHECK(p1.scene_id == "pair");
  CHECK(p1.mask_id == "flat");

  const CodedPair p3 = render_stereo_pair(scene, mask, cfg, 0.02, 78);
  CHECK(max_abs_diff(p1.coded_left, p3.coded_left) > 0.0);

  const PsfStack stack = compute_psf_stack(mask, cfg);
  const CodedPair p4 = render_stereo_pair_with_stack(scene, stack, cfg, 0.02, 77, "flat");
  CHECK(max_abs_diff(p1.coded_left, p4.coded_left) == 0.0);
  CHECK(max_abs_diff(p1.coded_right, p4.coded_right) == 0.0);

  // The two views differ (parallax plus independent noise draws).
  CHECK(max_abs_diff(p1.coded_left, p1.coded_right) > 0.01);
}

TEST_CASE("noise texture stays inside its band") {
  const Image tex = make_noise_texture(64, 96, 5);
  for (int c = 0; c < 3; ++c) {
    CHECK(grid_min(tex[c]) >= 0.1);
    CHECK(grid_max(tex[c]) <= 0.9);
    // Actual spread, not a constant field.
    CHECK(grid_max(tex[c]) - grid_min(tex[c]) > 0.3);
  }
  const Image again = make_noise_texture(64, 96, 5);
  CHECK(max_abs_diff(tex, again) == 0.0);
  const Image other = make_noise_texture(64, 96, 6);
  CHECK(max_abs_diff(tex, other) > 0.0);
}

TEST_CASE("plane scenes shift a shared texture by the disparity") {
  const double d = 48.0;
  const Scene scene = make_plane_scene(64, 256, {d}, 13, "one-plane");
  REQUIRE(scene.texture_left.height() == 64);
  REQUIRE(scene.texture_left.width() == 256);
  CHECK(grid_min(scene.disparity_left) == d);
  CHECK(grid_max(scene.disparity_left) == d);
  CHECK(grid_min(scene.disparity_right) == d);

  // left(y, x) samples the same world point as right(y, x - d).
  double worst = 0.0;
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 64; ++y)
      for (int x = static_cast<int>(d); x < 256; ++x)
        worst = std::max(worst, std::abs(scene.texture_left[c](y, x) -
                                         scene.texture_right[c](y, x - d)));
  CHECK(worst < 1e-12);
}

TEST_CASE("two-plane scenes occlude the far layer in both views") {
  const Scene scene = make_plane_scene(96, 320, {19.2, 124.8}, 17, "two-plane");
  int near_count = 0, far_count = 0;
  for (int y = 0; y < 96; ++y)
    for (int x = 0; x < 320; ++x) {
      const double d = scene.disparity_left(y, x);
      CHECK((d == 19.2 || d == 124.8));
      (d == 124.8 ? near_count : far_count) += 1;
    }
  CHECK(near_count > 0);
  CHECK(far_count > 0);

  // Where both views see the near plane, the stereo correspondence holds at
  // its disparity too.
  int checked = 0;
  for (int y = 0; y < 96; ++y)
    for (int x = 320 / 2; x < 320; ++x) {
      const int xs = x - 124;  // integer part of the near shift
      if (xs < 0) continue;
      if (scene.disparity_left(y, x) != 124.8) continue;
      if (scene.disparity_right(y, xs) != 124.8) continue;
      ++checked;
    }
  CHECK(checked > 1000);
}

TEST_CASE("ramp scenes cover the disparity interval row by row") {
  const Scene scene = make_ramp_scene(100, 256, 0.0, 192.0, 7, "ramp");
  CHECK(scene.disparity_left(0, 0) == doctest::Approx(0.0));
  CHECK(scene.disparity_left(99, 0) == doctest::Approx(192.0));
  CHECK(scene.disparity_left(50, 10) ==
        doctest::Approx(scene.disparity_left(50, 200)));

  // Monotone in the row index.
  for (int y = 1; y < 100; ++y)
    CHECK(scene.disparity_left(y, 0) > scene.disparity_left(y - 1, 0));

  // Equal endpoints give a constant-disparity plane.
  const Scene flat_scene = make_ramp_scene(40, 256, 96.0, 96.0, 7, "flat-ramp");
  CHECK(grid_min(flat_scene.disparity_left) == 96.0);
  CHECK(grid_max(flat_scene.disparity_left) == 96.0);
}

TEST_CASE("stair scenes hold each strip at one disparity") {
  const std::vector<double> steps = {28.8, 105.6, 67.2};
  const Scene scene = make_stair_scene(90, 256, steps, 23, "stairs");
  CHECK(scene.disparity_left(0, 17) == 28.8);
  CHECK(scene.disparity_left(44, 17) == 105.6);
  CHECK(scene.disparity_left(89, 17) == 67.2);
  for (int y = 0; y < 90; ++y) {
    const double d = scene.disparity_left(y, 0);
    CHECK((d == 28.8 || d == 105.6 || d == 67.2));
    CHECK(scene.disparity_left(y, 200) == d);
  }
  CHECK_THROWS_AS(make_stair_scene(4, 64, {1.0, 2.0, 3.0}, 1, "toothin"), ConfigError);
}

TEST_CASE("toy and eval scene sets") {
  OpticalConfig cfg;
  const auto toys = make_toy_scenes(96, 384, cfg, 42);
  REQUIRE(toys.size() == 4);
  CHECK(toys[0].id == "plane-a");
  CHECK(toys[1].id == "plane-c");
  CHECK(toys[2].id == "plane-b");
  CHECK(toys[3].id == "duo");
  for (const Scene& s : toys) {
    CHECK(s.texture_left.height() == 96);
    CHECK(s.texture_left.width() == 384);
    CHECK(grid_min(s.disparity_left) >= cfg.disparity_min);
    CHECK(grid_max(s.disparity_left) <= cfg.disparity_max);
  }
  // Near-far pairs: each consecutive pair spans a wide depth range.
  const double mid = 96.0;
  CHECK(grid_mean(toys[0].disparity_left) < mid);
  CHECK(grid_mean(toys[1].disparity_left) > mid);

  const auto evals = make_eval_scenes(96, 384, cfg, 42);
  REQUIRE(evals.size() == 4);
  // The ramps cover the full working range in both directions.
  CHECK(grid_min(evals[0].disparity_left) == doctest::Approx(cfg.disparity_min));
  CHECK(grid_max(evals[0].disparity_left) == doctest::Approx(cfg.disparity_max));
  CHECK(evals[1].disparity_left(0, 0) == doctest::Approx(cfg.disparity_max));

  // Same seed reproduces the sets exactly.
  const auto toys2 = make_toy_scenes(96, 384, cfg, 42);
  CHECK(max_abs_diff(toys[3].texture_left, toys2[3].texture_left) == 0.0);
  CHECK(max_abs_diff(toys[3].disparity_left, toys2[3].disparity_left) == 0.0);
}
