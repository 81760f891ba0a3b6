#pragma once

#include <cstdint>

#include "ocs/core/camera.hpp"
#include "ocs/core/tensor.hpp"

namespace ocs::depth {

/// C = f_w / (W * d). Throws DomainError on a nonpositive depth, naming the pixel.
Tensor<float> to_canonical_inverse(const Tensor<float>& depth, const CameraIntrinsics& k);

/// d = f_w / (W * C). Throws DomainError on a nonpositive value, naming the pixel.
Tensor<float> from_canonical_inverse(const Tensor<float>& canon, const CameraIntrinsics& k);

/// RMS of the residual plus lambda_grad times the RMS of its forward-difference
/// x- and y-gradients (last column/row excluded). Norms are per-pixel means so
/// the value is resolution-independent.
double depth_loss(const Tensor<float>& c_pred, const Tensor<float>& c_gt,
                  double lambda_grad = 1.0);

struct DepthEvalReport {
  double delta1 = 0, delta2 = 0, delta3 = 0;  // percentages
  double abs_rel = 0, log10 = 0, rmse = 0, rmse_log = 0, silog = 0;
};

/// Eight-metric suite over pixels where mask != 0 (pass an empty mask tensor to
/// evaluate everywhere). SILog is the square root of the population variance of
/// log residuals, reported without the x100 convention.
DepthEvalReport eval_depth(const Tensor<float>& pred, const Tensor<float>& gt,
                           const Tensor<std::uint8_t>& mask);

}  // namespace ocs::depth
