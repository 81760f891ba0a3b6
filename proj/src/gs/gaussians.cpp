#include "ocs/gs/gaussians.hpp"

#include <cmath>
#include <string>

#include "ocs/core/error.hpp"

namespace ocs::gs {

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("logit: p must be in (0, 1)");
  return std::log(p / (1.0 - p));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

GaussianSet materialize(const float* gauss_params, const float* depth, int width, int height,
                        int k, const std::vector<std::uint32_t>& pixels,
                        const CameraIntrinsics& cam) {
  (void)height;
  GaussianSet out;
  out.frame = Frame::Camera;
  out.primitives.reserve(pixels.size() * static_cast<std::size_t>(k));
  out.source_pixel.reserve(out.primitives.capacity());

  for (const std::uint32_t pix : pixels) {
    const int u = static_cast<int>(pix % static_cast<std::uint32_t>(width));
    const int v = static_cast<int>(pix / static_cast<std::uint32_t>(width));
    const double d = depth[pix];
    const Vec3 anchor = backproject(u, v, d, cam);
    const float* base = gauss_params + static_cast<std::size_t>(pix) * k * 14;
    for (int i = 0; i < k; ++i) {
      const float* p = base + i * 14;
      for (int f = 0; f < 14; ++f) {
        if (!std::isfinite(p[f]))
          throw DomainError("materialize: non-finite Gaussian parameter at pixel (" +
                            std::to_string(u) + ", " + std::to_string(v) + ")");
      }
      GaussianPrimitive g;
      g.mean = anchor + Vec3{p[0], p[1], p[2]};
      g.log_scale = {p[3], p[4], p[5]};
      g.rotation = Quat{p[6], p[7], p[8], p[9]}.normalized().canonical();
      g.opacity = sigmoid(p[10]);
      g.color = {p[11], p[12], p[13]};
      out.primitives.push_back(g);
      out.source_pixel.push_back(pix);
    }
  }
  return out;
}

GaussianSet apply_sim3(const GaussianSet& g, const Sim3& t, CanonicalizeMode mode,
                       Frame out_frame) {
  GaussianSet out;
  out.frame = out_frame;
  out.source_pixel = g.source_pixel;
  out.primitives.reserve(g.size());
  const Quat rot = t.rotation.canonical();
  const double log_s = std::log(t.scale);
  for (const auto& p : g.primitives) {
    GaussianPrimitive q = p;
    q.mean = t.apply(p.mean);
    if (mode == CanonicalizeMode::FullSim3) {
      q.rotation = (rot * p.rotation).normalized().canonical();
      q.log_scale = p.log_scale + Vec3{log_s, log_s, log_s};
    }
    out.primitives.push_back(q);
  }
  return out;
}

GaussianSet to_canonical(const GaussianSet& g, const Sim3& pose, CanonicalizeMode mode) {
  return apply_sim3(g, pose.inverse(), mode, Frame::Canonical);
}

double offset_regularizer(const std::vector<Vec3>& offsets, double tau_offset) {
  if (tau_offset < 0) throw DomainError("offset_regularizer: tau must be >= 0");
  double total = 0.0;
  for (const auto& d : offsets) {
    const double v = d.l1_norm() - tau_offset;
    if (v > 0) total += v;
  }
  return total;
}

}  // namespace ocs::gs
