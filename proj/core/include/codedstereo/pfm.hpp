#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "codedstereo/image.hpp"

namespace cs {

struct PfmFile {
  bool color = false;  // PF (3-channel) vs Pf (1-channel)
  Grid gray;
  Image rgb;
  double scale = -1.0;  // sign encodes byte order: negative = little-endian
};

// PFM layout: "Pf\n<width> <height>\n<scale>\n" then 32-bit floats, bottom
// row first, little-endian iff scale < 0. Round-trips are bit-exact.
std::vector<uint8_t> encode_pfm(const Grid& grid, double scale = -1.0);
std::vector<uint8_t> encode_pfm(const Image& image, double scale = -1.0);
PfmFile decode_pfm(const std::vector<uint8_t>& bytes);

void write_pfm(const std::string& path, const Grid& grid, double scale = -1.0);
void write_pfm(const std::string& path, const Image& image, double scale = -1.0);
PfmFile read_pfm(const std::string& path);

// Single-channel convenience for disparity maps; a color PF file is an error.
Grid read_pfm_gray(const std::string& path);

}  // namespace cs
