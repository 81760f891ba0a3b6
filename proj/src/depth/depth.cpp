#include "ocs/depth/depth.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "ocs/core/error.hpp"
#include "ocs/kernels/kernels.hpp"

namespace ocs::depth {

namespace {

[[noreturn]] void bad_pixel(const char* what, std::size_t i, std::size_t w) {
  throw DomainError(std::string(what) + " at pixel (" + std::to_string(i % w) + ", " +
                    std::to_string(i / w) + ")");
}

}  // namespace

Tensor<float> to_canonical_inverse(const Tensor<float>& depth, const CameraIntrinsics& k) {
  Tensor<float> out(depth.shape());
  const std::size_t w = depth.dim(1);
  const double scale = k.f_w / static_cast<double>(k.width);
  for (std::size_t i = 0; i < depth.size(); ++i) {
    const double d = depth[i];
    if (!(d > 0)) bad_pixel("to_canonical_inverse: nonpositive depth", i, w);
    out[i] = static_cast<float>(scale / d);
  }
  return out;
}

Tensor<float> from_canonical_inverse(const Tensor<float>& canon, const CameraIntrinsics& k) {
  Tensor<float> out(canon.shape());
  const std::size_t w = canon.dim(1);
  const double scale = k.f_w / static_cast<double>(k.width);
  for (std::size_t i = 0; i < canon.size(); ++i) {
    const double c = canon[i];
    if (!(c > 0)) bad_pixel("from_canonical_inverse: nonpositive value", i, w);
    out[i] = static_cast<float>(scale / c);
  }
  return out;
}

double depth_loss(const Tensor<float>& c_pred, const Tensor<float>& c_gt,
                  double lambda_grad) {
  if (!c_pred.same_shape(c_gt)) throw DomainError("depth_loss: shape mismatch");
  const std::size_t h = c_pred.dim(0), w = c_pred.dim(1);

  std::vector<double> res(h * w);
  for (std::size_t i = 0; i < res.size(); ++i)
    res[i] = static_cast<double>(c_pred[i]) - static_cast<double>(c_gt[i]);

  const auto& k = kern::kernels();
  const double l2 = std::sqrt(k.sum_sq_f64(res.data(), res.size()) /
                              static_cast<double>(res.size()));

  double gx_sq = 0.0, gy_sq = 0.0;
  std::size_t ngx = 0, ngy = 0;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x + 1 < w; ++x) {
      const double g = res[y * w + x + 1] - res[y * w + x];
      gx_sq += g * g;
      ++ngx;
    }
  for (std::size_t y = 0; y + 1 < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const double g = res[(y + 1) * w + x] - res[y * w + x];
      gy_sq += g * g;
      ++ngy;
    }
  const double gx = ngx ? std::sqrt(gx_sq / static_cast<double>(ngx)) : 0.0;
  const double gy = ngy ? std::sqrt(gy_sq / static_cast<double>(ngy)) : 0.0;
  return l2 + lambda_grad * (gx + gy);
}

DepthEvalReport eval_depth(const Tensor<float>& pred, const Tensor<float>& gt,
                           const Tensor<std::uint8_t>& mask) {
  if (!pred.same_shape(gt)) throw DomainError("eval_depth: shape mismatch");
  const bool masked = !mask.empty();
  if (masked && mask.shape() != pred.shape())
    throw DomainError("eval_depth: mask shape mismatch");

  std::vector<double> p, g;
  p.reserve(pred.size());
  g.reserve(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (masked && mask[i] == 0) continue;
    const double pv = pred[i], gv = gt[i];
    if (!(pv > 0) || !(gv > 0))
      throw DomainError("eval_depth: nonpositive depth inside evaluation mask");
    p.push_back(pv);
    g.push_back(gv);
  }
  const std::size_t n = p.size();
  if (n == 0) throw DomainError("eval_depth: empty evaluation mask");

  std::size_t d1 = 0, d2 = 0, d3 = 0;
  double abs_rel = 0, log10 = 0, sq = 0, sq_log = 0, sum_log = 0;
  std::vector<double> logdiff(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ratio = std::max(p[i] / g[i], g[i] / p[i]);
    if (ratio < 1.25) ++d1;
    if (ratio < 1.5625) ++d2;
    if (ratio < 1.953125) ++d3;
    abs_rel += std::abs(p[i] - g[i]) / g[i];
    log10 += std::abs(std::log10(p[i]) - std::log10(g[i]));
    sq += (p[i] - g[i]) * (p[i] - g[i]);
    const double ld = std::log(p[i]) - std::log(g[i]);
    logdiff[i] = ld;
    sq_log += ld * ld;
    sum_log += ld;
  }
  const double dn = static_cast<double>(n);
  DepthEvalReport r;
  r.delta1 = 100.0 * static_cast<double>(d1) / dn;
  r.delta2 = 100.0 * static_cast<double>(d2) / dn;
  r.delta3 = 100.0 * static_cast<double>(d3) / dn;
  r.abs_rel = abs_rel / dn;
  r.log10 = log10 / dn;
  r.rmse = std::sqrt(sq / dn);
  r.rmse_log = std::sqrt(sq_log / dn);
  const double mean_log = sum_log / dn;
  r.silog = std::sqrt(std::max(0.0, sq_log / dn - mean_log * mean_log));
  return r;
}

}  // namespace ocs::depth
