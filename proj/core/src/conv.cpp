#include "codedstereo/conv.hpp"

#include <algorithm>
#include <cassert>

#include "codedstereo/errors.hpp"
#include "codedstereo/fft.hpp"

namespace cs {

ConvPlan::ConvPlan(int img_h, int img_w, int kernel_size, int kernel_center)
    : ih_(img_h), iw_(img_w), k_(kernel_size), c_(kernel_center) {
  if (img_h <= 0 || img_w <= 0) throw DomainError("ConvPlan: empty image");
  if (kernel_size <= 0 || kernel_center < 0 || kernel_center >= kernel_size)
    throw DomainError("ConvPlan: bad kernel geometry");
  margin_ = std::max(c_, k_ - 1 - c_);
  ph_ = fft_fast_size(ih_ + 2 * margin_);
  pw_ = fft_fast_size(iw_ + 2 * margin_);
}

Spectrum ConvPlan::kernel_transform(const Grid& kernel) const {
  if (kernel.height() != k_ || kernel.width() != k_)
    throw DomainError("ConvPlan: kernel shape mismatch");
  std::vector<double> padded(static_cast<size_t>(ph_) * pw_, 0.0);
  for (int u = 0; u < k_; ++u) {
    int y = ((u - c_) % ph_ + ph_) % ph_;
    for (int v = 0; v < k_; ++v) {
      int x = ((v - c_) % pw_ + pw_) % pw_;
      padded[static_cast<size_t>(y) * pw_ + x] = kernel(u, v);
    }
  }
  Spectrum out(spectrum_size());
  fft2_r2c(ph_, pw_, padded.data(), out.data());
  return out;
}

Spectrum ConvPlan::forward(const Grid& img) const {
  if (img.height() != ih_ || img.width() != iw_)
    throw DomainError("ConvPlan: image shape mismatch");
  std::vector<double> padded(static_cast<size_t>(ph_) * pw_, 0.0);
  const int ext_h = ih_ + 2 * margin_;
  const int ext_w = iw_ + 2 * margin_;
  for (int y = 0; y < ext_h; ++y) {
    const int sy = std::clamp(y - margin_, 0, ih_ - 1);
    const double* src = img.row(sy);
    double* dst = padded.data() + static_cast<size_t>(y) * pw_;
    for (int x = 0; x < ext_w; ++x) dst[x] = src[std::clamp(x - margin_, 0, iw_ - 1)];
  }
  Spectrum out(spectrum_size());
  fft2_r2c(ph_, pw_, padded.data(), out.data());
  return out;
}

Grid ConvPlan::finish(Spectrum& spectrum) const {
  assert(spectrum.size() == spectrum_size());
  std::vector<double> padded(static_cast<size_t>(ph_) * pw_);
  fft2_c2r(ph_, pw_, spectrum.data(), padded.data());
  const double scale = 1.0 / (static_cast<double>(ph_) * pw_);
  Grid out(ih_, iw_);
  for (int y = 0; y < ih_; ++y) {
    const double* src = padded.data() + static_cast<size_t>(y + margin_) * pw_ + margin_;
    double* dst = out.row(y);
    for (int x = 0; x < iw_; ++x) dst[x] = src[x] * scale;
  }
  return out;
}

Grid ConvPlan::convolve(const Grid& img, const Spectrum& kernel_tf) const {
  Spectrum s = forward(img);
  spectrum_multiply(s, kernel_tf);
  return finish(s);
}

void spectrum_multiply(Spectrum& a, const Spectrum& b) {
  assert(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
}

void spectrum_multiply_add(Spectrum& acc, const Spectrum& a, const Spectrum& b) {
  assert(acc.size() == a.size() && a.size() == b.size());
  for (size_t i = 0; i < acc.size(); ++i) acc[i] += a[i] * b[i];
}

Grid conv2_direct_replicate(const Grid& img, const Grid& kernel, int center) {
  Grid out(img.height(), img.width());
  const int k = kernel.height();
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      double s = 0.0;
      for (int u = 0; u < k; ++u) {
        const int sy = std::clamp(y - (u - center), 0, img.height() - 1);
        for (int v = 0; v < kernel.width(); ++v) {
          const int sx = std::clamp(x - (v - center), 0, img.width() - 1);
          s += kernel(u, v) * img(sy, sx);
        }
      }
      out(y, x) = s;
    }
  return out;
}

}  // namespace cs
