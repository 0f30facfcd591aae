#pragma once

#include "codedstereo/image.hpp"
#include "codedstereo/optics.hpp"

namespace cs {

struct StereoResult {
  Grid disparity;        // left-reference disparity, pixels
  Grid disparity_right;  // right-reference disparity (used for the LR check)
  Grid confidence;       // [0,1]; 0 where the LR check failed or texture is flat
};

// Zero-mean normalized cross-correlation block matching over integer
// disparities [0, max_disp], winner-take-all with parabola sub-pixel
// refinement, left-right consistency check and background fill.
// max_disp < 0 selects config.disparity_max.
StereoResult match_stereo(const Image& left, const Image& right,
                          const OpticalConfig& config, int block_radius = 8,
                          int max_disp = -1);

// Box-filtered local mean with edge replication, window (2r+1)^2.
Grid box_mean(const Grid& g, int radius);

}  // namespace cs
