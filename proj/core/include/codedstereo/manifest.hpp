#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "codedstereo/render.hpp"

namespace cs {

struct ManifestResult {
  std::vector<Scene> scenes;
  std::vector<std::string> rejected;  // one human-readable reason per dropped entry
};

// Manifest: one scene per line,
//   left_rgb=PATH right_rgb=PATH left_disp=PATH right_disp=PATH
//   [disp_scale=S] [disp_offset=O] [id=NAME]
// with `#` comments. Textures are 8/16-bit PNG mapped to [0,1]; disparities
// are 1-channel PFM, or integer PNG whose raw quanta get scale/offset
// applied (disp_offset=-134 turns raw full-range disparities into the
// working convention). Relative paths resolve against the manifest.
//
// All referenced files are existence-checked before any decoding. Scenes
// with mismatched shapes, or where more than half the disparity values had
// to be clamped into [disparity_min, disparity_max], are dropped with a
// reason; if nothing survives that is an error.
//
// crop_height/crop_width > 0 cut a window from each scene: centered when
// crop_seed is 0, otherwise at a per-scene position derived from the seed.
ManifestResult load_scene_manifest(const std::string& path, const OpticalConfig& config,
                                   int crop_height = 0, int crop_width = 0,
                                   uint64_t crop_seed = 0);

}  // namespace cs
