#pragma once

#include <cstdint>
#include <vector>

namespace ocs::nocs {

inline constexpr int kDefaultBins = 64;

struct BinDelta {
  int bin = 0;
  double delta = 0.0;
};

/// Centered-bin encoding of c in [0, 1]: bin = min(floor(c*M), M-1),
/// delta = c - (bin + 0.5)/M. Throws DomainError outside [0, 1].
BinDelta encode(double c, int bins = kDefaultBins);

/// (bin + 0.5)/M + delta, clamped to [0, 1]. Throws DomainError for a bin
/// outside [0, M).
double decode(int bin, double delta, int bins = kDefaultBins);

/// Bin-and-delta training loss over a per-pixel, per-axis logit field.
///   logits: n_pix x 3 x M   delta_pred: n_pix x 3
///   gt_nocs: n_pix x 3      mask: n_pix (nonzero = foreground)
/// Mean over foreground pixels and axes of CE(logits, gt_bin) +
/// (delta_pred - gt_delta)^2. Throws DomainError on an empty mask.
double nocs_loss(const float* logits, const float* delta_pred, const float* gt_nocs,
                 const std::uint8_t* mask, std::size_t n_pix, int bins = kDefaultBins);

}  // namespace ocs::nocs
