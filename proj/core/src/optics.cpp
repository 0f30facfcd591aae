#include "codedstereo/optics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "codedstereo/errors.hpp"
#include "codedstereo/fft.hpp"

namespace cs {

namespace {

constexpr double kPi = 3.14159265358979323846;

int nearest_even(double x) {
  int m = 2 * static_cast<int>(std::llround(x / 2.0));
  return std::max(m, 2);
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Radial polynomial R_n^m (m >= 0, n - m even).
double zernike_radial(int n, int m, double rho) {
  double sum = 0.0;
  for (int k = 0; k <= (n - m) / 2; ++k) {
    double term = factorial(n - k) /
                  (factorial(k) * factorial((n + m) / 2 - k) * factorial((n - m) / 2 - k));
    if (k % 2) term = -term;
    sum += term * std::pow(rho, n - 2 * k);
  }
  return sum;
}

bool zone_in_disk(int grid, int iy, int ix) {
  const double c = (grid - 1) / 2.0;
  const double half = grid / 2.0;
  const double dy = iy - c;
  const double dx = ix - c;
  return dy * dy + dx * dx <= half * half;
}

}  // namespace

double OpticalConfig::d0_pixels() const {
  if (d0 >= 0.0) return d0;
  const double raw = focal_length * baseline / (focus_distance * sensor_pixel_pitch);
  return std::round(raw) - preshift;
}

std::vector<double> OpticalConfig::disparity_levels() const {
  std::vector<double> levels(num_disparity_levels);
  const double span = disparity_max - disparity_min;
  for (int i = 0; i < num_disparity_levels; ++i)
    levels[i] = disparity_min + span * i / (num_disparity_levels - 1);
  return levels;
}

double OpticalConfig::aperture_radius() const {
  return std::min(focal_length / (2.0 * f_number), grid_half_extent());
}

void OpticalConfig::validate() const {
  if (focal_length <= 0 || baseline <= 0 || sensor_pixel_pitch <= 0 || mask_pitch <= 0)
    throw ConfigError("optical config: lengths must be strictly positive");
  for (double w : wavelengths)
    if (w <= 0) throw ConfigError("optical config: wavelengths must be strictly positive");
  if (f_number < 1.0) throw ConfigError("optical config: f_number must be >= 1");
  if (focus_distance <= focal_length)
    throw ConfigError("optical config: focus_distance must exceed focal_length");
  if (refractive_index <= 1.0)
    throw ConfigError("optical config: refractive_index must exceed 1");
  if (mask_grid_size < 3 || mask_grid_size % 2 == 0)
    throw ConfigError("optical config: mask_grid_size must be odd and >= 3");
  if (num_disparity_levels < 2)
    throw ConfigError("optical config: num_disparity_levels must be >= 2");
  if (disparity_min >= disparity_max)
    throw ConfigError("optical config: disparity_min must be below disparity_max");
  if (psf_kernel_size < 2 || psf_kernel_size % 2 != 0)
    throw ConfigError("optical config: psf_kernel_size must be even and >= 2");
  if (preshift < 0) throw ConfigError("optical config: preshift must be >= 0");
  const double df = d0_pixels();
  if (df < disparity_min || df > disparity_max)
    throw ConfigError("optical config: in-focus disparity " + std::to_string(df) +
                      " outside [" + std::to_string(disparity_min) + ", " +
                      std::to_string(disparity_max) + "]");
}

void noll_to_nm(int j, int* n_out, int* m_out) {
  if (j < 1) throw DomainError("noll index must be >= 1");
  int n = 0;
  while ((n + 1) * (n + 2) / 2 < j) ++n;
  const int p = j - n * (n + 1) / 2;  // 1-based position within the row
  int m;
  if (n % 2 == 0) {
    m = 2 * (p / 2);
  } else {
    m = 2 * ((p - 1) / 2) + 1;
  }
  // Even Noll index = cosine (m > 0), odd = sine (m < 0); m = 0 unsigned.
  if (m != 0 && j % 2 != 0) m = -m;
  *n_out = n;
  *m_out = m;
}

ZernikeBasis build_zernike_basis(int grid_size, int count) {
  if (grid_size < 3 || grid_size % 2 == 0)
    throw ConfigError("zernike basis: grid_size must be odd and >= 3");
  if (count < 1) throw ConfigError("zernike basis: count must be >= 1");

  ZernikeBasis basis;
  basis.count = count;
  basis.grid_size = grid_size;
  basis.in_disk.assign(static_cast<size_t>(grid_size) * grid_size, 0);
  basis.maps.reserve(count);

  const double c = (grid_size - 1) / 2.0;
  const double half = grid_size / 2.0;
  for (int iy = 0; iy < grid_size; ++iy)
    for (int ix = 0; ix < grid_size; ++ix)
      basis.in_disk[static_cast<size_t>(iy) * grid_size + ix] =
          zone_in_disk(grid_size, iy, ix) ? 1 : 0;

  for (int j = 1; j <= count; ++j) {
    int n, m;
    noll_to_nm(j, &n, &m);
    const int ma = std::abs(m);
    const double norm = (ma == 0) ? std::sqrt(n + 1.0) : std::sqrt(2.0 * (n + 1.0));
    Grid map(grid_size, grid_size, 0.0);
    for (int iy = 0; iy < grid_size; ++iy) {
      for (int ix = 0; ix < grid_size; ++ix) {
        if (!basis.in_disk[static_cast<size_t>(iy) * grid_size + ix]) continue;
        const double x = (ix - c) / half;
        const double y = (iy - c) / half;
        const double rho = std::sqrt(x * x + y * y);
        const double theta = std::atan2(y, x);
        double v = norm * zernike_radial(n, ma, rho);
        if (m > 0)
          v *= std::cos(ma * theta);
        else if (m < 0)
          v *= std::sin(ma * theta);
        map(iy, ix) = v;
      }
    }
    basis.maps.push_back(std::move(map));
  }
  return basis;
}

PhaseMask make_flat_mask(int grid_size) {
  PhaseMask mask;
  mask.height_map = Grid(grid_size, grid_size, 0.0);
  mask.provenance = "flat";
  return mask;
}

PhaseMask mask_from_coefficients(const ZernikeBasis& basis,
                                 const std::vector<double>& coefficients,
                                 const std::string& provenance) {
  if (static_cast<int>(coefficients.size()) != basis.count)
    throw ConfigError("mask_from_coefficients: coefficient count mismatch");
  PhaseMask mask;
  mask.coefficients = coefficients;
  mask.provenance = provenance;
  mask.height_map = Grid(basis.grid_size, basis.grid_size, 0.0);
  for (int j = 0; j < basis.count; ++j) {
    const double cj = coefficients[j];
    if (cj == 0.0) continue;
    const Grid& z = basis.maps[j];
    for (size_t i = 0; i < mask.height_map.size(); ++i) mask.height_map[i] += cj * z[i];
  }
  return mask;
}

PhaseMask make_cubic_mask(double alpha, const OpticalConfig& config) {
  if (alpha < 0) throw DomainError("make_cubic_mask: alpha must be >= 0");
  const int grid = config.mask_grid_size;
  const double scale =
      alpha * config.wavelengths[1] / (2.0 * kPi * (config.refractive_index - 1.0));
  PhaseMask mask;
  mask.provenance = "cubic";
  mask.height_map = Grid(grid, grid, 0.0);
  const double c = (grid - 1) / 2.0;
  const double half = grid / 2.0;
  for (int iy = 0; iy < grid; ++iy)
    for (int ix = 0; ix < grid; ++ix) {
      if (!zone_in_disk(grid, iy, ix)) continue;
      const double x = (ix - c) / half;
      const double y = (iy - c) / half;
      mask.height_map(iy, ix) = scale * (x * x * x + y * y * y);
    }
  return mask;
}

PhaseMask quantize_height(const PhaseMask& mask, double step, int levels) {
  if (step <= 0) throw DomainError("quantize_height: step must be positive");
  if (levels < 2) throw DomainError("quantize_height: levels must be >= 2");
  const int grid = mask.height_map.height();
  PhaseMask out;
  out.provenance = mask.provenance;
  out.height_map = Grid(grid, grid, 0.0);

  double lo = 0.0;
  bool first = true;
  for (int iy = 0; iy < grid; ++iy)
    for (int ix = 0; ix < grid; ++ix)
      if (zone_in_disk(grid, iy, ix)) {
        const double h = mask.height_map(iy, ix);
        lo = first ? h : std::min(lo, h);
        first = false;
      }

  const double hi = (levels - 1) * step;
  for (int iy = 0; iy < grid; ++iy)
    for (int ix = 0; ix < grid; ++ix) {
      if (!zone_in_disk(grid, iy, ix)) continue;
      const double shifted = mask.height_map(iy, ix) - lo;
      const double snapped = std::round(shifted / step) * step;
      out.height_map(iy, ix) = std::clamp(snapped, 0.0, hi);
    }
  return out;
}

Grid height_to_phase(const Grid& height_map, double wavelength, double refractive_index) {
  if (wavelength <= 0) throw DomainError("height_to_phase: wavelength must be positive");
  if (refractive_index <= 1) throw DomainError("height_to_phase: refractive index must exceed 1");
  const double k = 2.0 * kPi / wavelength * (refractive_index - 1.0);
  Grid phase(height_map.height(), height_map.width());
  for (size_t i = 0; i < phase.size(); ++i) phase[i] = k * height_map[i];
  return phase;
}

Grid defocus_phase(double d, const OpticalConfig& config, double wavelength) {
  if (d < config.disparity_min || d > config.disparity_max)
    throw DomainError("defocus_phase: disparity out of range");
  const int grid = config.mask_grid_size;
  // k/(2 f b) * (d - d0)_phys * r^2 with k = 2 pi / lambda and disparities
  // converted to meters on the sensor.
  const double coeff = kPi / (wavelength * config.focal_length * config.baseline) *
                       (d - config.d0_pixels()) * config.sensor_pixel_pitch;
  Grid phase(grid, grid, 0.0);
  const double c = (grid - 1) / 2.0;
  for (int iy = 0; iy < grid; ++iy)
    for (int ix = 0; ix < grid; ++ix) {
      const double x = (ix - c) * config.mask_pitch;
      const double y = (iy - c) * config.mask_pitch;
      phase(iy, ix) = coeff * (x * x + y * y);
    }
  return phase;
}

int psf_padded_size(double wavelength, const OpticalConfig& config, int factor) {
  const double base = wavelength * config.focal_length /
                      (config.mask_pitch * config.sensor_pixel_pitch);
  return nearest_even(factor * base);
}

PsfSampling psf_sampling(const OpticalConfig& config) {
  for (int s = 1; s <= 15; s += 2) {
    PsfSampling sampling;
    sampling.factor = s;
    bool ok = true;
    for (int c = 0; c < 3; ++c) {
      sampling.padded[c] = psf_padded_size(config.wavelengths[c], config, s);
      if (sampling.padded[c] < config.mask_grid_size) ok = false;
    }
    if (ok) return sampling;
  }
  double worst = config.wavelengths[0];
  for (double w : config.wavelengths) worst = std::min(worst, w);
  const double required =
      config.mask_grid_size * config.mask_pitch * config.sensor_pixel_pitch /
      (worst * config.focal_length);
  throw ConfigError("psf sampling non-realizable: required supersampling factor " +
                    std::to_string(required) + " exceeds the supported maximum of 15");
}

Grid compute_psf(const PhaseMask& mask, double d, double wavelength,
                 const OpticalConfig& config) {
  if (mask.height_map.height() != config.mask_grid_size ||
      mask.height_map.width() != config.mask_grid_size)
    throw ConfigError("compute_psf: mask grid does not match config");
  if (d < config.disparity_min || d > config.disparity_max)
    throw DomainError("compute_psf: disparity out of range");

  const PsfSampling sampling = psf_sampling(config);
  const int s = sampling.factor;
  const int m = psf_padded_size(wavelength, config, s);
  if (m < config.mask_grid_size)
    throw ConfigError("compute_psf: padded grid smaller than mask grid");

  const int grid = config.mask_grid_size;
  const double c = (grid - 1) / 2.0;
  const double r_ap = config.aperture_radius();
  const double r_ap2 = r_ap * r_ap;
  const double height_k = 2.0 * kPi / wavelength * (config.refractive_index - 1.0);
  const double defocus_k = kPi / (wavelength * config.focal_length * config.baseline) *
                           (d - config.d0_pixels()) * config.sensor_pixel_pitch;

  std::vector<std::complex<double>> pupil(static_cast<size_t>(m) * m,
                                          std::complex<double>(0.0, 0.0));
  const int offset = m / 2 - grid / 2;
  for (int iy = 0; iy < grid; ++iy) {
    const double y = (iy - c) * config.mask_pitch;
    for (int ix = 0; ix < grid; ++ix) {
      const double x = (ix - c) * config.mask_pitch;
      const double r2 = x * x + y * y;
      if (r2 > r_ap2) continue;
      const double phase = height_k * mask.height_map(iy, ix) + defocus_k * r2;
      pupil[static_cast<size_t>(offset + iy) * m + (offset + ix)] =
          std::complex<double>(std::cos(phase), std::sin(phase));
    }
  }

  std::vector<std::complex<double>> field(pupil.size());
  fft2_c2c_forward(m, m, pupil.data(), field.data());

  // Bin s x s intensity samples per sensor pixel; bins are centered on the
  // DFT samples (s odd) and indexed mod m, which keeps replicated diffraction
  // orders and defocus-pair symmetry exact.
  const int k = config.psf_kernel_size;
  const int hw = (s - 1) / 2;
  Grid kernel(k, k, 0.0);
  double total = 0.0;
  for (int by = 0; by < k; ++by)
    for (int bx = 0; bx < k; ++bx) {
      double acc = 0.0;
      for (int t = -hw; t <= hw; ++t) {
        const int fy = ((s * (by - k / 2) + t) % m + m) % m;
        for (int u = -hw; u <= hw; ++u) {
          const int fx = ((s * (bx - k / 2) + u) % m + m) % m;
          acc += std::norm(field[static_cast<size_t>(fy) * m + fx]);
        }
      }
      kernel(by, bx) = acc;
      total += acc;
    }

  if (!(total > 0.0) || !std::isfinite(total))
    throw NumericError("compute_psf: degenerate pupil, kernel energy is zero");
  for (size_t i = 0; i < kernel.size(); ++i) kernel[i] /= total;
  return kernel;
}

PsfStack compute_psf_stack(const PhaseMask& mask, const OpticalConfig& config) {
  config.validate();
  PsfStack stack;
  stack.levels = config.disparity_levels();
  stack.kernels.reserve(3 * stack.levels.size());
  for (int ch = 0; ch < 3; ++ch)
    for (double d : stack.levels)
      stack.kernels.push_back(compute_psf(mask, d, config.wavelengths[ch], config));
  return stack;
}

double fisher_objective(const PsfStack& stack, const OpticalConfig& config) {
  (void)config;
  const int levels = static_cast<int>(stack.levels.size());
  if (levels < 2) throw DomainError("fisher_objective: need at least 2 disparity levels");
  constexpr double eps = 1e-6;
  double total = 0.0;
  for (int ch = 0; ch < 3; ++ch) {
    for (int l = 1; l + 1 < levels; ++l) {
      const Grid& lo = stack.kernel(ch, l - 1);
      const Grid& mid = stack.kernel(ch, l);
      const Grid& hi = stack.kernel(ch, l + 1);
      const double dd = stack.levels[l + 1] - stack.levels[l - 1];
      for (size_t i = 0; i < mid.size(); ++i) {
        const double g = (hi[i] - lo[i]) / dd;
        total += g * g / (mid[i] + eps);
      }
    }
  }
  return total;
}

}  // namespace cs
