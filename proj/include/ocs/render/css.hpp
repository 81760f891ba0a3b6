#pragma once

#include <vector>

#include "ocs/render/raster.hpp"
#include "ocs/render/views.hpp"

namespace ocs::render {

struct CssLossReport {
  double total = 0.0;
  std::vector<double> l1;    // per view, mean over pixels of the 3-channel L1
  std::vector<double> ssim;  // per view
  double lambda_ssim = 0.2;
  double mse = 0.0;  // over all views, for PSNR tracking
};

/// sum_n ( L1(gt_n, render_n) + lambda_ssim * (1 - SSIM) ), with white-ish
/// background handled by the render target. Views render in parallel;
/// gradients (when requested) merge in view order.
CssLossReport css_loss(const gs::GaussianSet& g_canonical, const std::vector<Image>& gt,
                       const CanonicalViewSet& views, double lambda_ssim = 0.2,
                       const RasterConfig& rc = {}, const Vec3& background = {1, 1, 1});

CssLossReport css_loss_grad(const gs::GaussianSet& g_canonical,
                            const std::vector<Image>& gt, const CanonicalViewSet& views,
                            double lambda_ssim, const RasterConfig& rc,
                            const Vec3& background, RenderGrads* grads);

struct FitConfig {
  int max_steps = 2000;
  double lr = 1.0;
  double momentum = 0.9;
  double lambda_ssim = 0.2;
  RasterConfig raster;
  Vec3 background{1, 1, 1};
  // Per-group learning-rate multipliers (canonical-unit scale).
  double lr_mean = 4e-3;
  double lr_log_scale = 6e-3;
  double lr_rotation = 2e-3;
  double lr_opacity = 2e-2;  // applied in logit space
  double lr_color = 1e-2;
  /// When > 0, stop once psnr(current) - psnr(init) reaches this many dB.
  double target_psnr_gain = 0.0;
  int check_every = 25;
  /// Backtracking safeguard: when a step increases the loss, halve the global
  /// step and reset momentum (bounded retries), keeping the loss non-increasing.
  bool monotone = false;
};

struct FitResult {
  gs::GaussianSet fitted;
  std::vector<double> loss_trace;  // recorded every check_every steps (and step 0)
  double psnr_init = 0.0;
  double psnr_final = 0.0;
  int steps_run = 0;
};

/// Momentum gradient descent on css_loss over all Gaussian parameters.
/// Opacities update in logit space; quaternions renormalize after each step.
/// Throws Error when the loss turns non-finite.
FitResult css_fit(const gs::GaussianSet& init, const std::vector<Image>& gt,
                  const CanonicalViewSet& views, const FitConfig& cfg);

}  // namespace ocs::render
