#pragma once

#include <complex>

namespace cs {

// Smallest size >= n whose prime factors are all in {2, 3, 5}.
int fft_fast_size(int n);

// Unnormalized out-of-place 2D transforms backed by cached FFTW plans.
// Plans are created lazily per shape under a lock; execution is thread safe.
// The c2r inverse overwrites its input buffer.
void fft2_c2c_forward(int h, int w, std::complex<double>* in, std::complex<double>* out);
void fft2_c2c_inverse(int h, int w, std::complex<double>* in, std::complex<double>* out);
void fft2_r2c(int h, int w, double* in, std::complex<double>* out);
void fft2_c2r(int h, int w, std::complex<double>* in, double* out);

}  // namespace cs
