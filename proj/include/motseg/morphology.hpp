#pragma once

#include "motseg/image.hpp"

namespace motseg {

// Binary morphology with a square structuring element of side 2*radius+1.
// Pixels outside the raster never constrain the result: erosion ignores
// them and dilation never creates them. With this convention erode/dilate
// form an adjunction on the image domain, so opening is anti-extensive,
// closing is extensive, and both are idempotent.
BinaryMask erode(const BinaryMask& mask, int radius);
BinaryMask dilate(const BinaryMask& mask, int radius);
BinaryMask morph_open(const BinaryMask& mask, int radius);
BinaryMask morph_close(const BinaryMask& mask, int radius);

// Opening followed by closing. Throws ConfigError for radius < 1.
BinaryMask morph_open_close(const BinaryMask& mask, int radius = 1);

}  // namespace motseg
