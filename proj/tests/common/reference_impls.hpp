// Straight-line scalar reference implementations, independent of the library
// code paths they check. Everything here is written as the most literal loop
// possible; no shared helpers with src/.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace refimpl {

struct DepthRef {
  double delta1, delta2, delta3, abs_rel, log10, rmse, rmse_log, silog;
};

inline DepthRef depth_metrics(const std::vector<double>& p, const std::vector<double>& g) {
  const std::size_t n = p.size();
  double d1 = 0, d2 = 0, d3 = 0, ar = 0, l10 = 0, sq = 0, sql = 0, suml = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = p[i] / g[i] > g[i] / p[i] ? p[i] / g[i] : g[i] / p[i];
    if (r < 1.25) d1 += 1;
    if (r < 1.25 * 1.25) d2 += 1;
    if (r < 1.25 * 1.25 * 1.25) d3 += 1;
    ar += std::fabs(p[i] - g[i]) / g[i];
    l10 += std::fabs(std::log10(p[i]) - std::log10(g[i]));
    sq += (p[i] - g[i]) * (p[i] - g[i]);
    const double ld = std::log(p[i]) - std::log(g[i]);
    sql += ld * ld;
    suml += ld;
  }
  DepthRef out;
  out.delta1 = 100.0 * d1 / n;
  out.delta2 = 100.0 * d2 / n;
  out.delta3 = 100.0 * d3 / n;
  out.abs_rel = ar / n;
  out.log10 = l10 / n;
  out.rmse = std::sqrt(sq / n);
  out.rmse_log = std::sqrt(sql / n);
  const double m = suml / n;
  out.silog = std::sqrt(sql / n - m * m);
  return out;
}

/// RMS-plus-gradient depth loss on an h x w residual grid.
inline double depth_loss(const std::vector<double>& pred, const std::vector<double>& gt,
                         std::size_t h, std::size_t w, double lambda) {
  std::vector<double> r(h * w);
  for (std::size_t i = 0; i < h * w; ++i) r[i] = pred[i] - gt[i];
  double sq = 0;
  for (double v : r) sq += v * v;
  double gx = 0, gy = 0;
  std::size_t ngx = 0, ngy = 0;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x + 1 < w; ++x) {
      const double d = r[y * w + x + 1] - r[y * w + x];
      gx += d * d;
      ++ngx;
    }
  for (std::size_t y = 0; y + 1 < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const double d = r[(y + 1) * w + x] - r[y * w + x];
      gy += d * d;
      ++ngy;
    }
  double out = std::sqrt(sq / (h * w));
  if (ngx) out += lambda * std::sqrt(gx / ngx);
  if (ngy) out += lambda * std::sqrt(gy / ngy);
  return out;
}

inline double chamfer(const std::vector<std::array<double, 3>>& a,
                      const std::vector<std::array<double, 3>>& b) {
  auto dir = [](const std::vector<std::array<double, 3>>& from,
                const std::vector<std::array<double, 3>>& to) {
    double total = 0;
    for (const auto& p : from) {
      double best = 1e300;
      for (const auto& q : to) {
        const double dx = p[0] - q[0], dy = p[1] - q[1], dz = p[2] - q[2];
        const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
        if (d < best) best = d;
      }
      total += best;
    }
    return total / static_cast<double>(from.size());
  };
  return dir(a, b) + dir(b, a);
}

inline double fscore(const std::vector<std::array<double, 3>>& a,
                     const std::vector<std::array<double, 3>>& b, double thr) {
  auto frac_within = [&](const std::vector<std::array<double, 3>>& from,
                         const std::vector<std::array<double, 3>>& to) {
    std::size_t cnt = 0;
    for (const auto& p : from) {
      double best = 1e300;
      for (const auto& q : to) {
        const double dx = p[0] - q[0], dy = p[1] - q[1], dz = p[2] - q[2];
        const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
        if (d < best) best = d;
      }
      if (best < thr) ++cnt;
    }
    return static_cast<double>(cnt) / static_cast<double>(from.size());
  };
  const double precision = frac_within(a, b);
  const double recall = frac_within(b, a);
  if (precision + recall <= 0) return 0.0;
  return 100.0 * 2.0 * precision * recall / (precision + recall);
}

/// Segmentation metrics over int label maps (-1 = background), top-5 candidates.
struct SegRef {
  double miou, fb_iou, hit5;
};

inline SegRef seg_metrics(const std::vector<std::int32_t>& top5,
                          const std::vector<std::int32_t>& gt) {
  const std::size_t n = gt.size();
  double fg_i = 0, fg_u = 0, bg_i = 0, bg_u = 0;
  for (std::size_t p = 0; p < n; ++p) {
    const bool gf = gt[p] != -1, pf = top5[p * 5] != -1;
    fg_i += gf && pf;
    fg_u += gf || pf;
    bg_i += !gf && !pf;
    bg_u += !gf || !pf;
  }
  const double fiou = fg_u > 0 ? fg_i / fg_u : 1.0;
  const double biou = bg_u > 0 ? bg_i / bg_u : 1.0;

  std::vector<std::int32_t> classes;
  for (std::size_t p = 0; p < n; ++p)
    if (gt[p] != -1) classes.push_back(gt[p]);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  double iou_sum = 0;
  for (auto cls : classes) {
    double inter = 0, uni = 0;
    for (std::size_t p = 0; p < n; ++p) {
      if (gt[p] == -1) continue;
      const bool a = gt[p] == cls, b = top5[p * 5] == cls;
      inter += a && b;
      uni += a || b;
    }
    iou_sum += uni > 0 ? inter / uni : 1.0;
  }

  double fg = 0, hits = 0;
  for (std::size_t p = 0; p < n; ++p) {
    if (gt[p] == -1) continue;
    fg += 1;
    for (int r = 0; r < 5; ++r)
      if (top5[p * 5 + r] == gt[p]) {
        hits += 1;
        break;
      }
  }
  return {100.0 * iou_sum / classes.size(), 100.0 * 0.5 * (fiou + biou), 100.0 * hits / fg};
}

/// Pose threshold accuracies from explicit error values.
struct PoseRef {
  double acc_t, acc_r, acc_j;
};

inline PoseRef pose_metrics(const std::vector<double>& rot_deg,
                            const std::vector<double>& trans_m) {
  const std::size_t n = rot_deg.size();
  double a = 0, b = 0, c = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool okr = rot_deg[i] < 10.0, okt = trans_m[i] < 0.10;
    a += okt;
    b += okr;
    c += okr && okt;
  }
  return {100.0 * a / n, 100.0 * b / n, 100.0 * c / n};
}

/// NOCS bin-and-delta loss with literal loops.
inline double nocs_loss(const std::vector<float>& logits, const std::vector<float>& delta,
                        const std::vector<float>& gt, const std::vector<std::uint8_t>& mask,
                        std::size_t n_pix, int bins) {
  double total = 0;
  std::size_t fg = 0;
  for (std::size_t p = 0; p < n_pix; ++p) {
    if (!mask[p]) continue;
    ++fg;
    for (int ax = 0; ax < 3; ++ax) {
      const double c = gt[p * 3 + ax];
      int bin = static_cast<int>(std::floor(c * bins));
      if (bin > bins - 1) bin = bins - 1;
      const double center = (bin + 0.5) / bins;
      const double gt_delta = c - center;
      const float* lg = logits.data() + (p * 3 + ax) * bins;
      double mx = lg[0];
      for (int b = 1; b < bins; ++b) mx = std::max<double>(mx, lg[b]);
      double lse = 0;
      for (int b = 0; b < bins; ++b) lse += std::exp(lg[b] - mx);
      total += mx + std::log(lse) - lg[bin];
      const double dd = delta[p * 3 + ax] - gt_delta;
      total += dd * dd;
    }
  }
  return total / (3.0 * static_cast<double>(fg));
}

}  // namespace refimpl
