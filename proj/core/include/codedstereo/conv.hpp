#pragma once

#include <complex>
#include <vector>

#include "codedstereo/image.hpp"

namespace cs {

using Spectrum = std::vector<std::complex<double>>;

// FFT convolution of fixed-size images with square kernels. The image is
// replicate-padded by max(center, size-1-center) on every side, zero-extended
// to an FFT-friendly size, and the output is cropped back to the input shape,
// so the result matches direct convolution with edge replication.
//
// Kernel transforms and image spectra are exposed separately so that one
// padded forward transform can be combined with many kernels and vice versa.
class ConvPlan {
 public:
  ConvPlan(int img_h, int img_w, int kernel_size, int kernel_center);

  int padded_height() const { return ph_; }
  int padded_width() const { return pw_; }
  size_t spectrum_size() const { return static_cast<size_t>(ph_) * (pw_ / 2 + 1); }

  // Transfer function of a kernel whose center tap sits at
  // (kernel_center, kernel_center).
  Spectrum kernel_transform(const Grid& kernel) const;

  // Forward transform of the replicate-padded image.
  Spectrum forward(const Grid& img) const;

  // Inverse transform and crop. Overwrites the spectrum buffer.
  Grid finish(Spectrum& spectrum) const;

  Grid convolve(const Grid& img, const Spectrum& kernel_tf) const;

 private:
  int ih_, iw_, k_, c_, margin_, ph_, pw_;
};

// a *= b, elementwise.
void spectrum_multiply(Spectrum& a, const Spectrum& b);
// acc += a * b, elementwise.
void spectrum_multiply_add(Spectrum& acc, const Spectrum& a, const Spectrum& b);

// Direct (non-FFT) convolution with edge replication; reference and
// small-kernel path. Center tap at (center, center).
Grid conv2_direct_replicate(const Grid& img, const Grid& kernel, int center);

}  // namespace cs
