#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "codedstereo/image.hpp"
#include "codedstereo/optics.hpp"

namespace cs {

struct Scene {
  Image texture_left, texture_right;   // [0,1]
  Grid disparity_left, disparity_right;  // reduced convention, pixels
  std::string id;
};

struct LayerMasks {
  std::vector<Grid> masks;  // one binary grid per disparity level
  std::vector<double> levels;
  int clamped = 0;  // pixels clamped into [disparity_min, disparity_max]
};

struct CodedPair {
  Image coded_left, coded_right;
  double noise_sigma = 0.0;
  std::string mask_id, scene_id;
};

// Assigns each pixel to the nearest disparity level; midway ties go to the
// smaller level. Out-of-range values are clamped and counted.
LayerMasks quantize_disparity(const Grid& disp, const OpticalConfig& config);

// Layered depth-dependent convolution with normalized matting:
// out = sum_d (M_d I * K_d) / max(sum_d (M_d * K_d), 1e-6) per channel.
Image render_coded_image(const Image& texture, const LayerMasks& layers,
                         const PsfStack& stack);

// Horizontal translation by config.preshift with edge replication. With
// is_disparity set, values are reduced by preshift as well so the working
// range becomes [0, disparity_max].
Grid preshift_right(const Grid& image_or_disp, const OpticalConfig& config,
                    bool is_disparity = false);

Grid add_noise(const Grid& image, double sigma, uint64_t seed);
Image add_noise(const Image& image, double sigma, uint64_t seed);

struct NoiseReference {
  double f_number = 8.0;
  double exposure = 1.0;
  double light = 1.0;
  double sigma = 0.02;
};

// Noise fraction scaling inversely with collected light:
// sigma_ref (F#/F#_ref)^2 (T_ref L_ref)/(T L).
double noise_sigma_for(double f_number, double exposure, double light,
                       const NoiseReference& reference = NoiseReference{});

CodedPair render_stereo_pair(const Scene& scene, const PhaseMask& mask,
                             const OpticalConfig& config, double sigma, uint64_t seed);

// Same pipeline with a precomputed PSF stack, so batched evaluations do not
// redo the Fourier optics per scene.
CodedPair render_stereo_pair_with_stack(const Scene& scene, const PsfStack& stack,
                                        const OpticalConfig& config, double sigma,
                                        uint64_t seed, const std::string& mask_id);

}  // namespace cs
