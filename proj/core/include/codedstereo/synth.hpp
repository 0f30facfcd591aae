#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "codedstereo/render.hpp"

namespace cs {

// Octave value-noise RGB texture with values in [0.1, 0.9].
Image make_noise_texture(int height, int width, uint64_t seed, int octaves = 4);

// Fronto-parallel layers at the given disparities (working convention,
// sorted ascending = far to near internally). Layer textures are continuous
// noise fields sampled at the exact sub-pixel offsets, so the two views are
// consistent for fractional disparities too, including occlusions.
Scene make_plane_scene(int height, int width, const std::vector<double>& disparities,
                       uint64_t seed, const std::string& id);

// Disparity varies linearly with the row from d_lo to d_hi; each row shifts
// rigidly between the views. Covers a disparity interval continuously.
Scene make_ramp_scene(int height, int width, double d_lo, double d_hi, uint64_t seed,
                      const std::string& id);

// Horizontal strips of constant disparity, top to bottom in the given step
// order. Fronto-parallel within each strip, so block matching stays valid
// away from the strip boundaries.
Scene make_stair_scene(int height, int width, const std::vector<double>& steps,
                       uint64_t seed, const std::string& id);

// Default toy set for optimization runs: three fronto-parallel planes plus a
// two-plane scene, with depth structure coarse enough for block matching and
// consecutive pairs spanning near and far depths.
std::vector<Scene> make_toy_scenes(int height, int width, const OpticalConfig& config,
                                   uint64_t seed);

// Evaluation set for comparisons and per-level curves: two full-range ramps
// (every disparity level has pixels) plus two plane scenes.
std::vector<Scene> make_eval_scenes(int height, int width, const OpticalConfig& config,
                                    uint64_t seed);

}  // namespace cs
