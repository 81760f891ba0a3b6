#pragma once

#include "ocs/render/raster.hpp"

namespace ocs::render {

/// Standard SSIM index: 11x11 Gaussian window (sigma 1.5), C1 = 0.01^2,
/// C2 = 0.03^2, averaged over channels and valid (fully supported) window
/// positions. Images must share shape and be at least 11x11.
double ssim(const Image& a, const Image& b);

/// ssim value plus d(ssim)/d(a) accumulated over all windows.
double ssim_with_grad(const Image& a, const Image& b, Image* grad_a);

}  // namespace ocs::render
