#include "motseg/components.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace motseg {

namespace {

class DisjointSet {
 public:
  int make() {
    parent_.push_back(static_cast<int>(parent_.size()));
    return parent_.back();
  }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // Keep the older provisional label as root so roots follow scan order.
    if (a < b) {
      parent_[b] = a;
    } else {
      parent_[a] = b;
    }
  }

 private:
  std::vector<int> parent_;
};

}  // namespace

std::array<double, 2> Component::centroid() const {
  double r = 0.0;
  double c = 0.0;
  for (const auto& p : pixels) {
    r += p.row;
    c += p.col;
  }
  const double n = static_cast<double>(std::max<std::size_t>(pixels.size(), 1));
  return {r / n, c / n};
}

std::vector<Component> connected_components(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  if (mask.empty()) return {};

  // Two-pass labeling with union-find over provisional labels.
  std::vector<int> provisional(mask.size(), -1);
  DisjointSet sets;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!mask.test(r, c)) continue;
      int label = -1;
      // Already-visited 8-neighbors: W, NW, N, NE.
      const int dr[4] = {0, -1, -1, -1};
      const int dc[4] = {-1, -1, 0, 1};
      for (int k = 0; k < 4; ++k) {
        const int rr = r + dr[k];
        const int cc = c + dc[k];
        if (!mask.contains(rr, cc)) continue;
        const int other = provisional[static_cast<std::size_t>(rr) * w + cc];
        if (other < 0) continue;
        if (label < 0) {
          label = other;
        } else {
          sets.unite(label, other);
        }
      }
      if (label < 0) label = sets.make();
      provisional[static_cast<std::size_t>(r) * w + c] = label;
    }
  }

  // Final labels in order of first appearance of each root.
  std::vector<int> root_to_index;
  std::vector<Component> components;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const int p = provisional[static_cast<std::size_t>(r) * w + c];
      if (p < 0) continue;
      const int root = sets.find(p);
      if (static_cast<std::size_t>(root) >= root_to_index.size()) root_to_index.resize(root + 1, -1);
      int& idx = root_to_index[root];
      if (idx < 0) {
        idx = static_cast<int>(components.size());
        Component comp;
        comp.label = idx + 1;
        comp.bbox = {r, c, r, c};
        components.push_back(std::move(comp));
      }
      Component& comp = components[idx];
      comp.pixels.push_back({r, c});
      comp.bbox.min_row = std::min(comp.bbox.min_row, r);
      comp.bbox.max_row = std::max(comp.bbox.max_row, r);
      comp.bbox.min_col = std::min(comp.bbox.min_col, c);
      comp.bbox.max_col = std::max(comp.bbox.max_col, c);
      if (r == 0 || c == 0 || r == h - 1 || c == w - 1) comp.touches_border = true;
    }
  }
  return components;
}

BinaryMask paint_components(int width, int height, const std::vector<Component>& components) {
  BinaryMask out(width, height);
  for (const auto& comp : components) {
    for (const auto& p : comp.pixels) out.set(p.row, p.col);
  }
  return out;
}

double min_distance(const Component& c, double row, double col) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : c.pixels) {
    const double dr = p.row - row;
    const double dc = p.col - col;
    best = std::min(best, dr * dr + dc * dc);
  }
  return std::sqrt(best);
}

}  // namespace motseg
