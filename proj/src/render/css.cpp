#include "ocs/render/css.hpp"

#include <cmath>

#include "ocs/core/error.hpp"
#include "ocs/core/parallel.hpp"
#include "ocs/kernels/kernels.hpp"
#include "ocs/render/ssim.hpp"

namespace ocs::render {

namespace {

CssLossReport css_loss_impl(const gs::GaussianSet& g, const std::vector<Image>& gt,
                            const CanonicalViewSet& views, double lambda_ssim,
                            const RasterConfig& rc, const Vec3& background,
                            RenderGrads* grads) {
  if (gt.size() != views.size()) throw DomainError("css_loss: view count mismatch");
  const std::size_t n_views = views.size();

  CssLossReport rep;
  rep.lambda_ssim = lambda_ssim;
  rep.l1.assign(n_views, 0.0);
  rep.ssim.assign(n_views, 0.0);
  std::vector<double> mse(n_views, 0.0);
  std::vector<RenderGrads> view_grads(grads ? n_views : 0);

  parallel_chunks(n_views, 1, [&](std::size_t vi, std::size_t) {
    RenderTarget target;
    target.camera = views.camera;
    target.pose = views.poses[vi];
    target.background = background;

    const std::size_t npx = gt[vi].size();
    const double px_count = static_cast<double>(gt[vi].dim(0) * gt[vi].dim(1));

    if (!grads) {
      const Image img = render(g, target, rc);
      rep.l1[vi] =
          kern::kernels().sum_abs_diff_f64(gt[vi].data(), img.data(), npx) / px_count;
      rep.ssim[vi] = ssim(img, gt[vi]);
      mse[vi] = kern::kernels().sum_sq_diff_f64(gt[vi].data(), img.data(), npx) /
                static_cast<double>(npx);
      return;
    }

    // One forward, one adjoint: the pixel gradient of L1 + lambda * (1 - SSIM)
    // is assembled from the in-flight forward image.
    view_grads[vi] = render_grad_fused(
        g, target,
        [&](const Image& img, Image* pixel_grad) {
          Image ssim_grad;
          rep.ssim[vi] = ssim_with_grad(img, gt[vi], &ssim_grad);
          rep.l1[vi] =
              kern::kernels().sum_abs_diff_f64(gt[vi].data(), img.data(), npx) / px_count;
          mse[vi] = kern::kernels().sum_sq_diff_f64(gt[vi].data(), img.data(), npx) /
                    static_cast<double>(npx);
          *pixel_grad = Image({gt[vi].dim(0), gt[vi].dim(1), 3});
          for (std::size_t i = 0; i < npx; ++i) {
            // L1 subgradient with a dead zone: rounding dust must not emit
            // full +-1 signs at a converged fit.
            const double diff = img[i] - gt[vi][i];
            const double sgn = diff > 1e-12 ? 1.0 : (diff < -1e-12 ? -1.0 : 0.0);
            (*pixel_grad)[i] = sgn / px_count - lambda_ssim * ssim_grad[i];
          }
        },
        rc);
  });

  double sq = 0.0;
  for (std::size_t vi = 0; vi < n_views; ++vi) {
    rep.total += rep.l1[vi] + lambda_ssim * (1.0 - rep.ssim[vi]);
    sq += mse[vi];
  }
  rep.mse = sq / static_cast<double>(n_views);

  if (grads) {
    grads->resize(g.size());
    for (std::size_t vi = 0; vi < n_views; ++vi) grads->add(view_grads[vi]);
  }
  return rep;
}

}  // namespace

CssLossReport css_loss(const gs::GaussianSet& g, const std::vector<Image>& gt,
                       const CanonicalViewSet& views, double lambda_ssim,
                       const RasterConfig& rc, const Vec3& background) {
  return css_loss_impl(g, gt, views, lambda_ssim, rc, background, nullptr);
}

CssLossReport css_loss_grad(const gs::GaussianSet& g, const std::vector<Image>& gt,
                            const CanonicalViewSet& views, double lambda_ssim,
                            const RasterConfig& rc, const Vec3& background,
                            RenderGrads* grads) {
  return css_loss_impl(g, gt, views, lambda_ssim, rc, background, grads);
}

FitResult css_fit(const gs::GaussianSet& init, const std::vector<Image>& gt,
                  const CanonicalViewSet& views, const FitConfig& cfg) {
  FitResult res;
  res.fitted = init;
  auto& prims = res.fitted.primitives;
  const std::size_t n = prims.size();

  // Velocity buffers, opacity handled in logit space.
  std::vector<Vec3> v_mean(n), v_ls(n), v_color(n);
  std::vector<std::array<double, 4>> v_rot(n, {0, 0, 0, 0});
  std::vector<double> v_logit(n, 0.0);
  std::vector<double> logits(n);
  for (std::size_t i = 0; i < n; ++i) logits[i] = gs::logit(prims[i].opacity);

  double lr = cfg.lr;
  RenderGrads grads;
  CssLossReport rep =
      css_loss_grad(res.fitted, gt, views, cfg.lambda_ssim, cfg.raster, cfg.background,
                    &grads);
  res.psnr_init = rep.mse > 0 ? 10.0 * std::log10(1.0 / rep.mse) : 1e9;
  res.loss_trace.push_back(rep.total);
  double prev_loss = rep.total;

  auto apply_step = [&](double step_lr) {
    for (std::size_t i = 0; i < n; ++i) {
      auto& p = prims[i];
      p.mean -= v_mean[i] * (step_lr * cfg.lr_mean);
      p.log_scale -= v_ls[i] * (step_lr * cfg.lr_log_scale);
      p.color -= v_color[i] * (step_lr * cfg.lr_color);
      logits[i] -= v_logit[i] * step_lr * cfg.lr_opacity;
      p.opacity = gs::sigmoid(logits[i]);
      p.rotation.w -= v_rot[i][0] * step_lr * cfg.lr_rotation;
      p.rotation.x -= v_rot[i][1] * step_lr * cfg.lr_rotation;
      p.rotation.y -= v_rot[i][2] * step_lr * cfg.lr_rotation;
      p.rotation.z -= v_rot[i][3] * step_lr * cfg.lr_rotation;
      p.rotation = p.rotation.normalized();
    }
  };

  int step = 0;
  for (; step < cfg.max_steps; ++step) {
    // momentum update from current gradients
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = prims[i];
      v_mean[i] = v_mean[i] * cfg.momentum + grads.mean[i];
      v_ls[i] = v_ls[i] * cfg.momentum + grads.log_scale[i];
      v_color[i] = v_color[i] * cfg.momentum + grads.color[i];
      const double dlogit = grads.opacity[i] * p.opacity * (1.0 - p.opacity);
      v_logit[i] = v_logit[i] * cfg.momentum + dlogit;
      for (int k2 = 0; k2 < 4; ++k2)
        v_rot[i][k2] = v_rot[i][k2] * cfg.momentum + grads.rotation[i][k2];
    }

    const gs::GaussianSet backup = res.fitted;
    const std::vector<double> backup_logits = logits;
    apply_step(lr);

    RenderGrads new_grads;
    CssLossReport new_rep = css_loss_grad(res.fitted, gt, views, cfg.lambda_ssim,
                                          cfg.raster, cfg.background, &new_grads);
    if (!std::isfinite(new_rep.total))
      throw Error("css_fit: loss diverged to a non-finite value at step " +
                  std::to_string(step));

    if (cfg.monotone && new_rep.total > prev_loss) {
      bool recovered = false;
      double trial_lr = lr;
      for (int retry = 0; retry < 8; ++retry) {
        res.fitted = backup;
        logits = backup_logits;
        trial_lr *= 0.5;
        apply_step(trial_lr);
        new_rep = css_loss_grad(res.fitted, gt, views, cfg.lambda_ssim, cfg.raster,
                                cfg.background, &new_grads);
        if (new_rep.total <= prev_loss) {
          recovered = true;
          lr = trial_lr;
          break;
        }
      }
      if (!recovered) {
        res.fitted = backup;
        logits = backup_logits;
        break;  // no descent direction at the smallest step: stop
      }
      for (auto& v : v_mean) v = {};
      for (auto& v : v_ls) v = {};
      for (auto& v : v_color) v = {};
      for (auto& v : v_rot) v = {0, 0, 0, 0};
      for (auto& v : v_logit) v = 0.0;
    }

    grads = std::move(new_grads);
    prev_loss = new_rep.total;
    rep = new_rep;

    if ((step + 1) % cfg.check_every == 0 || step + 1 == cfg.max_steps) {
      res.loss_trace.push_back(rep.total);
      if (cfg.target_psnr_gain > 0.0 && rep.mse > 0.0) {
        const double gain = 10.0 * std::log10(1.0 / rep.mse) - res.psnr_init;
        if (gain >= cfg.target_psnr_gain) {
          ++step;
          break;
        }
      }
    }
  }

  res.steps_run = step;
  res.psnr_final = rep.mse > 0 ? 10.0 * std::log10(1.0 / rep.mse) : 1e9;
  return res;
}

}  // namespace ocs::render
