#pragma once

#include <string>

#include "codedstereo/image.hpp"

namespace cs {

// RGB PNG in [0,1]; values are clamped and rounded to the target depth.
void write_png(const std::string& path, const Image& image, int bit_depth = 8);

// Grayscale PNG in [0,1].
void write_png_gray(const std::string& path, const Grid& grid, int bit_depth = 8);

// Reads 8/16-bit PNG to [0,1]. Grayscale files are replicated to RGB;
// palettes are expanded; alpha is dropped.
Image read_png(const std::string& path);

// Reads a single-channel PNG; color files are an error (used for scaled
// integer disparity maps, where channel mixing would corrupt values).
Grid read_png_gray(const std::string& path);

// Same, but keeps raw integer sample values (0..255 or 0..65535) instead of
// normalizing, so disparity scale factors apply to stored quanta.
Grid read_png_gray_raw(const std::string& path);

}  // namespace cs
