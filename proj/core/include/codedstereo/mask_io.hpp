#pragma once

#include <string>

#include "codedstereo/optics.hpp"

namespace cs {

// Text mask format:
//   mask-height v1 <grid_size>
//   provenance <word>
//   <grid_size rows of grid_size height values, micrometers>
//   coeffs <count>            (optional)
//   <count coefficient values, meters>
// Heights snap to a 1e-15 m lattice on the first write (far below the 200 nm
// fabrication step) and are printed as exact decimals, so write -> read ->
// write reproduces the file byte for byte.
std::string encode_mask(const PhaseMask& mask);
PhaseMask decode_mask(const std::string& text);

void write_mask(const std::string& path, const PhaseMask& mask);
PhaseMask read_mask(const std::string& path);

}  // namespace cs
