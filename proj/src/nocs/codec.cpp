#include "ocs/nocs/codec.hpp"

#include <cmath>

#include "ocs/core/error.hpp"

namespace ocs::nocs {

BinDelta encode(double c, int bins) {
  if (!(c >= 0.0 && c <= 1.0)) throw DomainError("nocs encode: coordinate outside [0, 1]");
  int bin = static_cast<int>(std::floor(c * bins));
  if (bin > bins - 1) bin = bins - 1;  // c = 1.0 boundary clamp
  const double center = (bin + 0.5) / bins;
  return {bin, c - center};
}

double decode(int bin, double delta, int bins) {
  if (bin < 0 || bin >= bins) throw DomainError("nocs decode: bin index out of range");
  double c = (bin + 0.5) / bins + delta;
  if (c < 0.0) c = 0.0;
  if (c > 1.0) c = 1.0;
  return c;
}

double nocs_loss(const float* logits, const float* delta_pred, const float* gt_nocs,
                 const std::uint8_t* mask, std::size_t n_pix, int bins) {
  double total = 0.0;
  std::size_t fg = 0;
  for (std::size_t p = 0; p < n_pix; ++p) {
    if (!mask[p]) continue;
    ++fg;
    for (int axis = 0; axis < 3; ++axis) {
      const BinDelta gt = encode(gt_nocs[p * 3 + axis], bins);
      const float* lg = logits + (p * 3 + axis) * bins;
      // log-sum-exp with max shift
      double mx = lg[0];
      for (int b = 1; b < bins; ++b) mx = std::max<double>(mx, lg[b]);
      double lse = 0.0;
      for (int b = 0; b < bins; ++b) lse += std::exp(lg[b] - mx);
      const double ce = (mx + std::log(lse)) - lg[gt.bin];
      const double dd = static_cast<double>(delta_pred[p * 3 + axis]) - gt.delta;
      total += ce + dd * dd;
    }
  }
  if (fg == 0) throw DomainError("nocs_loss: empty foreground mask");
  return total / (static_cast<double>(fg) * 3.0);
}

}  // namespace ocs::nocs
