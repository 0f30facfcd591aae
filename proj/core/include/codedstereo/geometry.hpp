#pragma once

#include <vector>

#include "codedstereo/optics.hpp"

namespace cs {

struct DofBounds {
  double near_m = 0.0;
  double far_m = 0.0;      // +inf when the far limit passes the hyperfocal point
  double dof_m = 0.0;      // far - near
  double approx_m = 0.0;   // thin-lens proportionality 2 z0^2 F# c / f^2
};

struct TradeoffPoint {
  double exposure_s = 0.0;
  double f_number = 0.0;
  double snr_db = 0.0;
  DofBounds dof;
};

// Reduced disparity (raw minus preshift) for an object at depth z.
double disparity_from_depth(double z, const OpticalConfig& config);

// Exact inverse of disparity_from_depth.
double depth_from_disparity(double d_reduced, const OpticalConfig& config);

// SNR model 20 log10(K L T f^2 / (sigma F#^2)), anchored so the reference
// point (F# 8, T 1, L 1, sigma 1) at 50 mm focal length sits at 50 dB.
double snr_db(double light, double exposure, double f_number, double sigma_tot,
              const OpticalConfig& config);

DofBounds depth_of_field(const OpticalConfig& config, double coc);

// For each exposure, the f-number holding snr_target and the resulting DOF.
std::vector<TradeoffPoint> tradeoff_curve(const OpticalConfig& config, double snr_target,
                                          const std::vector<double>& exposures, double coc);

}  // namespace cs
