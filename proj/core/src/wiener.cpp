#include "codedstereo/wiener.hpp"

#include <algorithm>
#include <cmath>

#include "codedstereo/conv.hpp"
#include "codedstereo/errors.hpp"

namespace cs {

namespace {

Spectrum wiener_filter(const ConvPlan& plan, const Grid& kernel, double nsr) {
  Spectrum h = plan.kernel_transform(kernel);
  for (auto& v : h) {
    const double power = std::norm(v);
    if (power + nsr < 1e-30)
      v = {0.0, 0.0};
    else
      v = std::conj(v) / (power + nsr);
  }
  return h;
}

double channel_variance(const Grid& g) {
  const double mu = grid_mean(g);
  double acc = 0.0;
  for (size_t i = 0; i < g.size(); ++i) {
    const double d = g[i] - mu;
    acc += d * d;
  }
  return g.empty() ? 0.0 : acc / static_cast<double>(g.size());
}

double resolve_nsr(double nsr, double sigma, const Grid& channel) {
  if (nsr >= 0) return nsr;
  const double var = channel_variance(channel);
  if (var <= 0.0) return 1.0;
  return sigma * sigma / var;
}

Grid mean_kernel(const PsfStack& stack, int channel) {
  const int levels = static_cast<int>(stack.levels.size());
  const Grid& first = stack.kernel(channel, 0);
  Grid avg(first.height(), first.width(), 0.0);
  for (int l = 0; l < levels; ++l) {
    const Grid& k = stack.kernel(channel, l);
    for (size_t i = 0; i < avg.size(); ++i) avg[i] += k[i];
  }
  for (size_t i = 0; i < avg.size(); ++i) avg[i] /= levels;
  return avg;
}

Image edof_single(const Image& coded, const PsfStack& stack, double nsr, double sigma) {
  Image out(coded.height(), coded.width());
  for (int c = 0; c < 3; ++c) {
    const Grid k = mean_kernel(stack, c);
    out[c] = wiener_deconvolve(coded[c], k, resolve_nsr(nsr, sigma, coded[c]));
  }
  return out;
}

Image edof_layered(const Image& coded, const PsfStack& stack, const Grid& hint,
                   double nsr, double sigma, const OpticalConfig& config) {
  if (hint.height() != coded.height() || hint.width() != coded.width())
    throw ConfigError("edof_reconstruct: hint shape does not match the image");
  const LayerMasks layers = quantize_disparity(hint, config);
  const int k = stack.kernels.front().height();
  ConvPlan plan(coded.height(), coded.width(), k, k / 2);

  Image out(coded.height(), coded.width());
  for (int c = 0; c < 3; ++c) {
    const double nsr_c = resolve_nsr(nsr, sigma, coded[c]);
    const Spectrum coded_f = plan.forward(coded[c]);
    Grid& dst = out[c];
    for (size_t l = 0; l < layers.masks.size(); ++l) {
      const Grid& mask = layers.masks[l];
      if (grid_max(mask) <= 0.0) continue;
      Spectrum filt = wiener_filter(plan, stack.kernel(c, static_cast<int>(l)), nsr_c);
      spectrum_multiply(filt, coded_f);
      const Grid restored = plan.finish(filt);
      for (size_t i = 0; i < dst.size(); ++i)
        if (mask[i] > 0.0) dst[i] = restored[i];
    }
    clip01(dst);
  }
  return out;
}

}  // namespace

Grid wiener_deconvolve(const Grid& coded, const Grid& kernel, double nsr) {
  if (nsr < 0) throw DomainError("wiener_deconvolve: nsr must be >= 0");
  ConvPlan plan(coded.height(), coded.width(), kernel.height(), kernel.height() / 2);
  Spectrum filt = wiener_filter(plan, kernel, nsr);
  Spectrum img = plan.forward(coded);
  spectrum_multiply(img, filt);
  Grid out = plan.finish(img);
  clip01(out);
  return out;
}

Image wiener_deconvolve(const Image& coded, const Grid& kernel, double nsr) {
  Image out;
  for (int c = 0; c < 3; ++c) out[c] = wiener_deconvolve(coded[c], kernel, nsr);
  return out;
}

std::pair<Image, Image> edof_reconstruct(const CodedPair& pair, const PsfStack& stack,
                                         EdofMode mode, const Grid* disparity_hint_left,
                                         const Grid* disparity_hint_right, double nsr,
                                         const OpticalConfig& config) {
  if (mode == EdofMode::kLayered) {
    if (disparity_hint_left == nullptr || disparity_hint_right == nullptr)
      throw ConfigError("edof_reconstruct: layered mode requires disparity hints");
    return {edof_layered(pair.coded_left, stack, *disparity_hint_left, nsr,
                         pair.noise_sigma, config),
            edof_layered(pair.coded_right, stack, *disparity_hint_right, nsr,
                         pair.noise_sigma, config)};
  }
  return {edof_single(pair.coded_left, stack, nsr, pair.noise_sigma),
          edof_single(pair.coded_right, stack, nsr, pair.noise_sigma)};
}

}  // namespace cs
