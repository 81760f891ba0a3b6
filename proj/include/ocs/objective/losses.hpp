#pragma once

#include <array>

namespace ocs::objective {

inline constexpr int kNumTasks = 5;  // depth, sem, nocs, css, cam

struct CombineResult {
  double total = 0.0;
  std::array<double, kNumTasks> grad_s{};  // d total / d s_t
};

/// Homoscedastic multi-task combination: total = sum_t (exp(-s_t) L_t + s_t),
/// with gradient 1 - exp(-s_t) L_t per log-variance. Stationary at s_t = ln L_t.
CombineResult combine(const std::array<double, kNumTasks>& losses,
                      const std::array<double, kNumTasks>& log_variances);

/// Huber(pred_w - gt_w; delta) + Huber(pred_h - gt_h; delta) on FOV angles.
double camera_fov_loss(double pred_theta_w, double pred_theta_h, double gt_theta_w,
                       double gt_theta_h, double huber_delta = 0.1);

double huber(double r, double delta);

}  // namespace ocs::objective
