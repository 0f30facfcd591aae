#include "codedstereo/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace cs {

namespace {

enum class Kind { C2CForward, C2CInverse, R2C, C2R };

std::mutex plan_mutex;
std::map<std::tuple<int, int, Kind>, fftw_plan>& plan_cache() {
  static std::map<std::tuple<int, int, Kind>, fftw_plan> cache;
  return cache;
}

fftw_plan get_plan(int h, int w, Kind kind, void* in, void* out) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto key = std::make_tuple(h, w, kind);
  auto it = plan_cache().find(key);
  if (it != plan_cache().end()) return it->second;

  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fftw_plan plan = nullptr;
  switch (kind) {
    case Kind::C2CForward:
      plan = fftw_plan_dft_2d(h, w, static_cast<fftw_complex*>(in),
                              static_cast<fftw_complex*>(out), FFTW_FORWARD, flags);
      break;
    case Kind::C2CInverse:
      plan = fftw_plan_dft_2d(h, w, static_cast<fftw_complex*>(in),
                              static_cast<fftw_complex*>(out), FFTW_BACKWARD, flags);
      break;
    case Kind::R2C:
      plan = fftw_plan_dft_r2c_2d(h, w, static_cast<double*>(in),
                                  static_cast<fftw_complex*>(out), flags);
      break;
    case Kind::C2R:
      plan = fftw_plan_dft_c2r_2d(h, w, static_cast<fftw_complex*>(in),
                                  static_cast<double*>(out), flags);
      break;
  }
  plan_cache()[key] = plan;
  return plan;
}

fftw_complex* as_fftw(std::complex<double>* p) {
  return reinterpret_cast<fftw_complex*>(p);
}

}  // namespace

int fft_fast_size(int n) {
  if (n <= 1) return 1;
  for (int s = n;; ++s) {
    int r = s;
    while (r % 2 == 0) r /= 2;
    while (r % 3 == 0) r /= 3;
    while (r % 5 == 0) r /= 5;
    if (r == 1) return s;
  }
}

void fft2_c2c_forward(int h, int w, std::complex<double>* in, std::complex<double>* out) {
  fftw_plan plan = get_plan(h, w, Kind::C2CForward, in, out);
  fftw_execute_dft(plan, as_fftw(in), as_fftw(out));
}

void fft2_c2c_inverse(int h, int w, std::complex<double>* in, std::complex<double>* out) {
  fftw_plan plan = get_plan(h, w, Kind::C2CInverse, in, out);
  fftw_execute_dft(plan, as_fftw(in), as_fftw(out));
}

void fft2_r2c(int h, int w, double* in, std::complex<double>* out) {
  fftw_plan plan = get_plan(h, w, Kind::R2C, in, out);
  fftw_execute_dft_r2c(plan, in, as_fftw(out));
}

void fft2_c2r(int h, int w, std::complex<double>* in, double* out) {
  fftw_plan plan = get_plan(h, w, Kind::C2R, in, out);
  fftw_execute_dft_c2r(plan, as_fftw(in), out);
}

}  // namespace cs
