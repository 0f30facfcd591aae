#pragma once

#include <utility>

#include "codedstereo/image.hpp"
#include "codedstereo/optics.hpp"
#include "codedstereo/render.hpp"

namespace cs {

// Frequency-domain Wiener filter conj(H)/(|H|^2 + nsr) applied per channel
// after replicate pre-padding of half the kernel size; output clipped to
// [0,1]. nsr = 0 degenerates to the pseudo-inverse (zero where H vanishes).
Grid wiener_deconvolve(const Grid& coded, const Grid& kernel, double nsr);
Image wiener_deconvolve(const Image& coded, const Grid& kernel, double nsr);

enum class EdofMode { kSingle, kLayered };

// EDOF texture recovery. Single mode deconvolves with the disparity-averaged
// kernel per channel; layered mode deconvolves per disparity level and
// composites through the hint's layer masks. nsr < 0 selects the automatic
// estimate noise_sigma^2 / channel variance.
std::pair<Image, Image> edof_reconstruct(const CodedPair& pair, const PsfStack& stack,
                                         EdofMode mode, const Grid* disparity_hint_left,
                                         const Grid* disparity_hint_right, double nsr,
                                         const OpticalConfig& config);

}  // namespace cs
