#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "codedstereo/image.hpp"

namespace cs {

struct OpticalConfig {
  double focal_length = 0.050;
  double f_number = 8.0;
  double baseline = 0.022;
  double sensor_pixel_pitch = 4.8e-6;
  double focus_distance = 1.0;
  std::array<double, 3> wavelengths = {610e-9, 530e-9, 470e-9};
  int mask_grid_size = 71;
  double mask_pitch = 88e-6;
  double refractive_index = 1.5;
  double disparity_min = 0.0;
  double disparity_max = 192.0;
  int num_disparity_levels = 21;
  double d0 = -1.0;  // < 0: derive from focus_distance
  int preshift = 134;
  int psf_kernel_size = 64;

  // In-focus disparity after pre-shift: round(f*b/(z0*pitch)) - preshift,
  // unless overridden by the d0 field.
  double d0_pixels() const;

  // num_disparity_levels evenly spaced values over [disparity_min, disparity_max].
  std::vector<double> disparity_levels() const;

  // Physical half-extent of the mask grid (inscribed aperture radius), meters.
  double grid_half_extent() const { return mask_grid_size * mask_pitch / 2.0; }

  // Aperture radius: iris from f-number, capped by the grid's inscribed circle.
  double aperture_radius() const;

  void validate() const;  // throws ConfigError on violated invariants

  bool operator==(const OpticalConfig&) const = default;
};

struct ZernikeBasis {
  int count = 0;
  int grid_size = 0;
  std::vector<Grid> maps;
  std::vector<uint8_t> in_disk;  // grid_size*grid_size disk indicator
};

// Noll-ordered Zernike maps sampled on the grid's inscribed unit disk,
// normalized sqrt(n+1) / sqrt(2(n+1)), zero outside the disk. j=1 is piston.
ZernikeBasis build_zernike_basis(int grid_size, int count);

// Noll index j (1-based) -> (n, m); m signed, negative = sine term.
void noll_to_nm(int j, int* n, int* m);

struct PhaseMask {
  std::vector<double> coefficients;  // empty, or one per basis map, meters
  Grid height_map;                   // meters, zero outside the disk
  std::string provenance;            // learned | cubic | fisher | flat | loaded
};

// Coefficient count used across the toolkit (Noll 1..55, radial order <= 9).
inline constexpr int kZernikeCount = 55;

PhaseMask make_flat_mask(int grid_size);
PhaseMask mask_from_coefficients(const ZernikeBasis& basis,
                                 const std::vector<double>& coefficients,
                                 const std::string& provenance);
PhaseMask make_cubic_mask(double alpha, const OpticalConfig& config);

// Snaps in-disk heights (shifted so their minimum is 0) to the nearest
// multiple of step, clamped to (levels-1)*step. Coefficients are dropped.
PhaseMask quantize_height(const PhaseMask& mask, double step, int levels);

Grid height_to_phase(const Grid& height_map, double wavelength, double refractive_index);

Grid defocus_phase(double d, const OpticalConfig& config, double wavelength);

struct PsfStack {
  std::vector<Grid> kernels;  // [3 * levels.size()], index channel*L + level
  std::vector<double> levels;

  const Grid& kernel(int channel, int level) const {
    return kernels[static_cast<size_t>(channel) * levels.size() + level];
  }
};

// Supersampling scheme for PSF synthesis. The pupil is embedded as point
// samples at mask_pitch into an M x M zero grid with M chosen so the Fourier
// pitch is sensor_pixel_pitch / factor; the squared transform magnitude is
// then box-binned factor x factor down to the sensor raster. factor is the
// smallest odd integer making M >= mask_grid_size for every wavelength.
struct PsfSampling {
  int factor = 1;
  std::array<int, 3> padded = {0, 0, 0};  // M per RGB wavelength
};
PsfSampling psf_sampling(const OpticalConfig& config);
int psf_padded_size(double wavelength, const OpticalConfig& config, int factor);

Grid compute_psf(const PhaseMask& mask, double d, double wavelength,
                 const OpticalConfig& config);
PsfStack compute_psf_stack(const PhaseMask& mask, const OpticalConfig& config);

// Depth discriminability of a PSF stack: sum over wavelengths, interior
// levels, and pixels of (dPSF/dd)^2 / (PSF + 1e-6) with central differences.
double fisher_objective(const PsfStack& stack, const OpticalConfig& config);

}  // namespace cs
