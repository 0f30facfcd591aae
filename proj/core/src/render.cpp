#include "codedstereo/render.hpp"

#include <algorithm>
#include <cmath>

#include "codedstereo/conv.hpp"
#include "codedstereo/errors.hpp"
#include "codedstereo/rng.hpp"

namespace cs {

LayerMasks quantize_disparity(const Grid& disp, const OpticalConfig& config) {
  LayerMasks out;
  out.levels = config.disparity_levels();
  const int n = static_cast<int>(out.levels.size());
  out.masks.assign(n, Grid(disp.height(), disp.width(), 0.0));

  const double lo = config.disparity_min;
  const double hi = config.disparity_max;
  const double step = (hi - lo) / (n - 1);
  for (int y = 0; y < disp.height(); ++y)
    for (int x = 0; x < disp.width(); ++x) {
      double d = disp(y, x);
      if (d < lo || d > hi) {
        d = std::clamp(d, lo, hi);
        ++out.clamped;
      }
      // Nearest level, ties toward the smaller one.
      const double pos = (d - lo) / step;
      int idx = static_cast<int>(std::ceil(pos - 0.5));
      idx = std::clamp(idx, 0, n - 1);
      out.masks[idx](y, x) = 1.0;
    }
  return out;
}

Image render_coded_image(const Image& texture, const LayerMasks& layers,
                         const PsfStack& stack) {
  if (layers.levels.size() != stack.levels.size())
    throw ConfigError("render_coded_image: layer levels do not match PSF stack levels");
  for (size_t i = 0; i < layers.levels.size(); ++i)
    if (layers.levels[i] != stack.levels[i])
      throw ConfigError("render_coded_image: layer levels do not match PSF stack levels");

  const int h = texture.height();
  const int w = texture.width();
  const int k = stack.kernels.front().height();
  ConvPlan plan(h, w, k, k / 2);

  std::array<Spectrum, 3> num, den;
  for (int c = 0; c < 3; ++c) {
    num[c].assign(plan.spectrum_size(), {0.0, 0.0});
    den[c].assign(plan.spectrum_size(), {0.0, 0.0});
  }

  for (size_t l = 0; l < layers.masks.size(); ++l) {
    const Grid& mask = layers.masks[l];
    if (grid_max(mask) <= 0.0) continue;  // empty layer contributes nothing
    const Spectrum mask_f = plan.forward(mask);
    for (int c = 0; c < 3; ++c) {
      const Spectrum kernel_tf = plan.kernel_transform(stack.kernel(c, static_cast<int>(l)));
      Grid masked(h, w);
      const Grid& tex = texture[c];
      for (size_t i = 0; i < masked.size(); ++i) masked[i] = mask[i] * tex[i];
      const Spectrum masked_f = plan.forward(masked);
      spectrum_multiply_add(num[c], masked_f, kernel_tf);
      spectrum_multiply_add(den[c], mask_f, kernel_tf);
    }
  }

  Image out(h, w);
  for (int c = 0; c < 3; ++c) {
    Grid numerator = plan.finish(num[c]);
    Grid denominator = plan.finish(den[c]);
    Grid& dst = out[c];
    for (size_t i = 0; i < dst.size(); ++i)
      dst[i] = numerator[i] / std::max(denominator[i], 1e-6);
  }
  return out;
}

Grid preshift_right(const Grid& image_or_disp, const OpticalConfig& config,
                    bool is_disparity) {
  if (image_or_disp.width() <= config.preshift)
    throw DomainError("preshift_right: image narrower than the pre-shift");
  Grid out = shift_columns_replicate(image_or_disp, config.preshift);
  if (is_disparity)
    for (size_t i = 0; i < out.size(); ++i) out[i] -= config.preshift;
  return out;
}

Grid add_noise(const Grid& image, double sigma, uint64_t seed) {
  if (sigma < 0) throw DomainError("add_noise: sigma must be >= 0");
  Grid out = image;
  if (sigma > 0) {
    Rng rng(seed);
    for (size_t i = 0; i < out.size(); ++i) out[i] += sigma * rng.normal();
  }
  clip01(out);
  return out;
}

Image add_noise(const Image& image, double sigma, uint64_t seed) {
  Image out;
  for (int c = 0; c < 3; ++c)
    out[c] = add_noise(image[c], sigma, Rng::derive(seed, static_cast<uint64_t>(c)));
  return out;
}

double noise_sigma_for(double f_number, double exposure, double light,
                       const NoiseReference& reference) {
  if (f_number <= 0 || exposure <= 0 || light <= 0)
    throw DomainError("noise_sigma_for: inputs must be positive");
  const double aperture = f_number / reference.f_number;
  return reference.sigma * aperture * aperture *
         (reference.exposure * reference.light) / (exposure * light);
}

CodedPair render_stereo_pair_with_stack(const Scene& scene, const PsfStack& stack,
                                        const OpticalConfig& config, double sigma,
                                        uint64_t seed, const std::string& mask_id) {
  CodedPair pair;
  pair.noise_sigma = sigma;
  pair.mask_id = mask_id;
  pair.scene_id = scene.id;

  const LayerMasks layers_left = quantize_disparity(scene.disparity_left, config);
  const LayerMasks layers_right = quantize_disparity(scene.disparity_right, config);
  Image left = render_coded_image(scene.texture_left, layers_left, stack);
  Image right = render_coded_image(scene.texture_right, layers_right, stack);
  pair.coded_left = add_noise(left, sigma, Rng::derive(seed, 0));
  pair.coded_right = add_noise(right, sigma, Rng::derive(seed, 1));
  return pair;
}

CodedPair render_stereo_pair(const Scene& scene, const PhaseMask& mask,
                             const OpticalConfig& config, double sigma, uint64_t seed) {
  const PsfStack stack = compute_psf_stack(mask, config);
  return render_stereo_pair_with_stack(scene, stack, config, sigma, seed, mask.provenance);
}

}  // namespace cs
