#pragma once

#include <vector>

#include "motseg/image.hpp"

namespace motseg {

struct BoundingBox {
  int min_row = 0;
  int min_col = 0;
  int max_row = 0;
  int max_col = 0;

  bool contains(Pixel p) const {
    return p.row >= min_row && p.row <= max_row && p.col >= min_col && p.col <= max_col;
  }
};

struct Component {
  int label = 0;
  std::vector<Pixel> pixels;  // raster-scan order
  BoundingBox bbox;
  bool touches_border = false;

  std::size_t area() const { return pixels.size(); }
  // (row, col) mean.
  std::array<double, 2> centroid() const;
};

// Maximal 8-connected components of the set bits. Labels run 1..n in the
// order in which each component's first pixel appears in a raster scan.
std::vector<Component> connected_components(const BinaryMask& mask);

// Mask holding exactly the pixels of the given components.
BinaryMask paint_components(int width, int height, const std::vector<Component>& components);

// Minimum Euclidean distance from any pixel of c to (row, col).
double min_distance(const Component& c, double row, double col);

}  // namespace motseg
