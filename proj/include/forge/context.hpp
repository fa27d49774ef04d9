#pragma once

#include "forge/image.hpp"

namespace forge {

// Classical soft-edge map: Gaussian pre-smooth (sigma 1), per-channel Scharr
// gradient magnitude, max over channels, divided by the 99th percentile and
// clamped to [0, 1].
ContextImage compute_soft_edge(const RgbImage& rgb);

// Min-max normalized depth inside the mask, nearer = brighter, 0 outside.
// A constant-depth region maps to 0.5. Holes (0 or non-finite) map to 0.
ContextImage compute_depth_context(const DepthImage& depth, const BinaryMask& m);

ContextImage compute_mask_context(const BinaryMask& m);

// c * m, pixelwise.
ContextImage masked_context(const ContextImage& c, const BinaryMask& m);

}  // namespace forge
