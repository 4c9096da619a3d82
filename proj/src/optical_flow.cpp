#include "motseg/optical_flow.hpp"

#include <algorithm>
#include <cmath>

namespace motseg {

FlowField::FlowField(int width, int height) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw DataError("flow field dimensions must be positive");
  uv_.assign(2 * static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0.0f);
}

void FlowParams::validate() const {
  if (!(smoothness_weight > 0.0)) throw ConfigError("flow smoothness_weight must be > 0");
  if (iterations_per_level < 1) throw ConfigError("flow iterations_per_level must be >= 1");
  if (pyramid_levels < 1) throw ConfigError("flow pyramid_levels must be >= 1");
  if (!(pyramid_scale > 0.0 && pyramid_scale < 1.0)) throw ConfigError("flow pyramid_scale must lie in (0, 1)");
  if (!(relaxation > 0.0 && relaxation < 2.0)) throw ConfigError("flow relaxation must lie in (0, 2)");
}

namespace {

constexpr int kMinPyramidSide = 8;

double sample_clamped(const ScalarImage& img, double x, double y) {
  const int w = img.width();
  const int h = img.height();
  x = std::clamp(x, 0.0, static_cast<double>(w - 1));
  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  const int x0 = std::min(static_cast<int>(x), w - 1);
  const int y0 = std::min(static_cast<int>(y), h - 1);
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = img(y0, x0) * (1.0 - fx) + img(y0, x1) * fx;
  const double bottom = img(y1, x0) * (1.0 - fx) + img(y1, x1) * fx;
  return top * (1.0 - fy) + bottom * fy;
}

ScalarImage gaussian_blur(const ScalarImage& img, double sigma) {
  if (sigma <= 0.0) return img;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
    sum += kernel[k + radius];
  }
  for (auto& k : kernel) k /= sum;

  const int w = img.width();
  const int h = img.height();
  ScalarImage tmp(w, h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * img(r, std::clamp(c + k, 0, w - 1));
      tmp(r, c) = acc;
    }
  }
  ScalarImage out(w, h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * tmp(std::clamp(r + k, 0, h - 1), c);
      out(r, c) = acc;
    }
  }
  return out;
}

// Pixel-center-aligned bilinear resize.
ScalarImage resize(const ScalarImage& img, int w, int h) {
  ScalarImage out(w, h);
  const double sx = static_cast<double>(img.width()) / w;
  const double sy = static_cast<double>(img.height()) / h;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) out(r, c) = sample_clamped(img, (c + 0.5) * sx - 0.5, (r + 0.5) * sy - 0.5);
  }
  return out;
}

ScalarImage downsample(const ScalarImage& img, int w, int h, double scale) {
  const double sigma = 0.6 * std::sqrt(1.0 / (scale * scale) - 1.0);
  return resize(gaussian_blur(img, sigma), w, h);
}

// Central differences with replicated borders.
void gradients(const ScalarImage& img, ScalarImage& gx, ScalarImage& gy) {
  const int w = img.width();
  const int h = img.height();
  gx = ScalarImage(w, h);
  gy = ScalarImage(w, h);
  for (int r = 0; r < h; ++r) {
    const int ru = std::max(r - 1, 0);
    const int rd = std::min(r + 1, h - 1);
    for (int c = 0; c < w; ++c) {
      const int cl = std::max(c - 1, 0);
      const int cr = std::min(c + 1, w - 1);
      gx(r, c) = 0.5 * (img(r, cr) - img(r, cl));
      gy(r, c) = 0.5 * (img(rd, c) - img(ru, c));
    }
  }
}

// Per-level linearized problem in terms of the total flow (U, V):
//   data(p) = Ix U + Iy V + b,  b = It - Ix u0 - Iy v0.
struct LinearSystem {
  int w = 0;
  int h = 0;
  double alpha2 = 0.0;
  std::vector<double> ix, iy, b;
  std::vector<double> a11, a12, a22, inv_det;
  std::vector<int> neighbors;
};

LinearSystem build_system(const ScalarImage& prev, const ScalarImage& warped, const ScalarImage& u0,
                          const ScalarImage& v0, double alpha) {
  const int w = prev.width();
  const int h = prev.height();
  ScalarImage gx0, gy0, gx1, gy1;
  gradients(prev, gx0, gy0);
  gradients(warped, gx1, gy1);

  LinearSystem sys;
  sys.w = w;
  sys.h = h;
  sys.alpha2 = alpha * alpha;
  const std::size_t n = prev.size();
  sys.ix.resize(n);
  sys.iy.resize(n);
  sys.b.resize(n);
  sys.a11.resize(n);
  sys.a12.resize(n);
  sys.a22.resize(n);
  sys.inv_det.resize(n);
  sys.neighbors.resize(n);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      const double ix = 0.5 * (gx0[i] + gx1[i]);
      const double iy = 0.5 * (gy0[i] + gy1[i]);
      const double it = warped[i] - prev[i];
      const int nb = (r > 0) + (r < h - 1) + (c > 0) + (c < w - 1);
      sys.ix[i] = ix;
      sys.iy[i] = iy;
      sys.b[i] = it - ix * u0[i] - iy * v0[i];
      sys.neighbors[i] = nb;
      sys.a11[i] = ix * ix + sys.alpha2 * nb;
      sys.a12[i] = ix * iy;
      sys.a22[i] = iy * iy + sys.alpha2 * nb;
      const double det = sys.a11[i] * sys.a22[i] - sys.a12[i] * sys.a12[i];
      sys.inv_det[i] = det > 0.0 ? 1.0 / det : 0.0;
    }
  }
  return sys;
}

double energy(const LinearSystem& sys, const ScalarImage& u, const ScalarImage& v) {
  double data = 0.0;
  double smooth = 0.0;
  for (int r = 0; r < sys.h; ++r) {
    for (int c = 0; c < sys.w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * sys.w + c;
      const double e = sys.ix[i] * u[i] + sys.iy[i] * v[i] + sys.b[i];
      data += e * e;
      if (c + 1 < sys.w) {
        const double du = u[i + 1] - u[i];
        const double dv = v[i + 1] - v[i];
        smooth += du * du + dv * dv;
      }
      if (r + 1 < sys.h) {
        const double du = u[i + sys.w] - u[i];
        const double dv = v[i + sys.w] - v[i];
        smooth += du * du + dv * dv;
      }
    }
  }
  return data + sys.alpha2 * smooth;
}

// One red-black SOR iteration. Each pixel update is the exact minimizer of
// the energy over that pixel's (U, V) given its neighbors, relaxed by omega.
// Pixels of one color never neighbor each other, so the result does not
// depend on visiting order within a half-sweep.
void sor_iteration(const LinearSystem& sys, ScalarImage& u, ScalarImage& v, double omega) {
  const int w = sys.w;
  const int h = sys.h;
  for (int color = 0; color < 2; ++color) {
    for (int r = 0; r < h; ++r) {
      for (int c = (r + color) & 1; c < w; c += 2) {
        const std::size_t i = static_cast<std::size_t>(r) * w + c;
        double su = 0.0;
        double sv = 0.0;
        if (c > 0) { su += u[i - 1]; sv += v[i - 1]; }
        if (c < w - 1) { su += u[i + 1]; sv += v[i + 1]; }
        if (r > 0) { su += u[i - w]; sv += v[i - w]; }
        if (r < h - 1) { su += u[i + w]; sv += v[i + w]; }
        const double ru = sys.alpha2 * su - sys.ix[i] * sys.b[i];
        const double rv = sys.alpha2 * sv - sys.iy[i] * sys.b[i];
        const double ustar = (sys.a22[i] * ru - sys.a12[i] * rv) * sys.inv_det[i];
        const double vstar = (sys.a11[i] * rv - sys.a12[i] * ru) * sys.inv_det[i];
        u[i] += omega * (ustar - u[i]);
        v[i] += omega * (vstar - v[i]);
      }
    }
  }
}

ScalarImage warp(const ScalarImage& img, const ScalarImage& u, const ScalarImage& v) {
  ScalarImage out(img.width(), img.height());
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) out(r, c) = sample_clamped(img, c + u(r, c), r + v(r, c));
  }
  return out;
}

}  // namespace

FlowField estimate_flow(const Frame& prev, const Frame& next, const FlowParams& params, FlowTrace* trace) {
  params.validate();
  if (prev.empty() || next.empty()) throw DataError("estimate_flow: empty frame");
  if (!prev.same_shape(next)) {
    throw DataError("estimate_flow: frame dimensions differ (" + std::to_string(prev.width()) + "x" +
                    std::to_string(prev.height()) + " vs " + std::to_string(next.width()) + "x" +
                    std::to_string(next.height()) + ")");
  }

  std::vector<ScalarImage> pyr0{to_gray(prev)};
  std::vector<ScalarImage> pyr1{to_gray(next)};
  for (int level = 1; level < params.pyramid_levels; ++level) {
    const double s = std::pow(params.pyramid_scale, level);
    const int w = static_cast<int>(std::lround(prev.width() * s));
    const int h = static_cast<int>(std::lround(prev.height() * s));
    if (std::min(w, h) < kMinPyramidSide) break;
    pyr0.push_back(downsample(pyr0.back(), w, h, static_cast<double>(w) / pyr0.back().width()));
    pyr1.push_back(downsample(pyr1.back(), w, h, static_cast<double>(w) / pyr1.back().width()));
  }
  const int levels = static_cast<int>(pyr0.size());
  if (trace) {
    trace->levels_used = levels;
    trace->finest_energy.clear();
  }

  ScalarImage u(pyr0.back().width(), pyr0.back().height());
  ScalarImage v(u.width(), u.height());
  for (int level = levels - 1; level >= 0; --level) {
    const ScalarImage& i0 = pyr0[level];
    const ScalarImage& i1 = pyr1[level];
    if (!u.same_shape(i0)) {
      const double fx = static_cast<double>(i0.width()) / u.width();
      const double fy = static_cast<double>(i0.height()) / u.height();
      u = resize(u, i0.width(), i0.height());
      v = resize(v, i0.width(), i0.height());
      for (auto& x : u.values()) x *= fx;
      for (auto& x : v.values()) x *= fy;
    }
    const LinearSystem sys = build_system(i0, warp(i1, u, v), u, v, params.smoothness_weight);
    const bool record = trace && level == 0;
    if (record) trace->finest_energy.push_back(energy(sys, u, v));
    for (int it = 0; it < params.iterations_per_level; ++it) {
      sor_iteration(sys, u, v, params.relaxation);
      if (record) trace->finest_energy.push_back(energy(sys, u, v));
    }
  }

  FlowField flow(prev.width(), prev.height());
  for (int r = 0; r < flow.height(); ++r) {
    for (int c = 0; c < flow.width(); ++c) {
      const double fu = std::isfinite(u(r, c)) ? u(r, c) : 0.0;
      const double fv = std::isfinite(v(r, c)) ? v(r, c) : 0.0;
      flow.set(r, c, static_cast<float>(fu), static_cast<float>(fv));
    }
  }
  return flow;
}

ScalarImage flow_magnitude(const FlowField& flow) {
  ScalarImage mag(flow.width(), flow.height());
  const auto d = flow.data();
  for (std::size_t i = 0; i < mag.size(); ++i) {
    const double u = d[2 * i];
    const double v = d[2 * i + 1];
    mag[i] = std::sqrt(u * u + v * v);
  }
  return mag;
}

VariationalFlowEstimator::VariationalFlowEstimator(FlowParams params) : params_(params) { params_.validate(); }

FlowField VariationalFlowEstimator::estimate(const Frame& prev, const Frame& next) const {
  return estimate_flow(prev, next, params_);
}

std::unique_ptr<FlowEstimator> make_flow_estimator(const std::string& name, const FlowParams& params) {
  if (name == "variational") return std::make_unique<VariationalFlowEstimator>(params);
  throw ConfigError("unknown flow estimator '" + name + "' (available: variational)");
}

}  // namespace motseg
