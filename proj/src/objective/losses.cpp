#include "ocs/objective/losses.hpp"

#include <cmath>

#include "ocs/core/error.hpp"

namespace ocs::objective {

CombineResult combine(const std::array<double, kNumTasks>& losses,
                      const std::array<double, kNumTasks>& log_variances) {
  CombineResult r;
  for (int t = 0; t < kNumTasks; ++t) {
    if (!std::isfinite(losses[t]) || losses[t] < 0)
      throw DomainError("combine: losses must be finite and nonnegative");
    const double w = std::exp(-log_variances[t]);
    r.total += w * losses[t] + log_variances[t];
    r.grad_s[t] = 1.0 - w * losses[t];
  }
  return r;
}

double huber(double r, double delta) {
  const double a = std::abs(r);
  return a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
}

double camera_fov_loss(double pred_theta_w, double pred_theta_h, double gt_theta_w,
                       double gt_theta_h, double huber_delta) {
  return huber(pred_theta_w - gt_theta_w, huber_delta) +
         huber(pred_theta_h - gt_theta_h, huber_delta);
}

}  // namespace ocs::objective
