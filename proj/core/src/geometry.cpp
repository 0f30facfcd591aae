#include "codedstereo/geometry.hpp"

#include <cmath>
#include <limits>

#include "codedstereo/errors.hpp"

namespace cs {

namespace {
// Reference anchor for the SNR model: F8, unit exposure, unit light, unit
// sigma at 50 mm focal length defines 50 dB.
constexpr double kRefSnrDb = 50.0;
constexpr double kRefFNumber = 8.0;
constexpr double kRefFocal = 0.050;
}  // namespace

double disparity_from_depth(double z, const OpticalConfig& config) {
  if (z <= config.focal_length)
    throw DomainError("disparity_from_depth: depth must exceed the focal length");
  const double raw =
      config.focal_length * config.baseline / (z * config.sensor_pixel_pitch);
  return raw - config.preshift;
}

double depth_from_disparity(double d_reduced, const OpticalConfig& config) {
  const double raw = d_reduced + config.preshift;
  if (raw <= 0.0)
    throw DomainError("depth_from_disparity: raw disparity must be positive");
  return config.focal_length * config.baseline / (raw * config.sensor_pixel_pitch);
}

double snr_db(double light, double exposure, double f_number, double sigma_tot,
              const OpticalConfig& config) {
  if (light <= 0 || exposure <= 0 || f_number <= 0 || sigma_tot <= 0)
    throw DomainError("snr_db: all inputs must be positive");
  const double f = config.focal_length;
  const double signal = light * exposure * f * f / (sigma_tot * f_number * f_number);
  const double ref = kRefFocal * kRefFocal / (kRefFNumber * kRefFNumber);
  return kRefSnrDb + 20.0 * std::log10(signal / ref);
}

DofBounds depth_of_field(const OpticalConfig& config, double coc) {
  if (coc <= 0) throw DomainError("depth_of_field: circle of confusion must be positive");
  const double f = config.focal_length;
  const double z0 = config.focus_distance;
  const double n = config.f_number;
  const double f2 = f * f;
  const double q = n * coc * (z0 - f);

  DofBounds out;
  out.near_m = z0 * f2 / (f2 + q);
  if (f2 > q) {
    out.far_m = z0 * f2 / (f2 - q);
    out.dof_m = out.far_m - out.near_m;
  } else {
    out.far_m = std::numeric_limits<double>::infinity();
    out.dof_m = std::numeric_limits<double>::infinity();
  }
  out.approx_m = 2.0 * z0 * z0 * n * coc / f2;
  return out;
}

std::vector<TradeoffPoint> tradeoff_curve(const OpticalConfig& config, double snr_target,
                                          const std::vector<double>& exposures, double coc) {
  if (exposures.empty()) throw ConfigError("tradeoff_curve: no exposure samples");
  std::vector<TradeoffPoint> points;
  points.reserve(exposures.size());
  const double f = config.focal_length;
  for (double t : exposures) {
    if (t <= 0) throw DomainError("tradeoff_curve: exposures must be positive");
    // Solve snr_db(1, t, F, 1) = snr_target for F.
    const double ref = kRefFocal * kRefFocal / (kRefFNumber * kRefFNumber);
    const double f_number =
        std::sqrt(t * f * f / (ref * std::pow(10.0, (snr_target - kRefSnrDb) / 20.0)));
    OpticalConfig at = config;
    at.f_number = f_number;
    TradeoffPoint p;
    p.exposure_s = t;
    p.f_number = f_number;
    p.snr_db = snr_db(1.0, t, f_number, 1.0, config);
    p.dof = depth_of_field(at, coc);
    points.push_back(p);
  }
  return points;
}

}  // namespace cs
