#include <cstddef>

#include "ocs/kernels/kernels.hpp"

namespace ocs::kern::scalar {

float dot_f32(const float* a, const float* b, std::size_t n) {
  float s = 0.0f;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot_f64(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_f64(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i];
  return s;
}

double sum_sq_f64(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

double sum_abs_diff_f64(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d < 0 ? -d : d;
  }
  return s;
}

double sum_sq_diff_f64(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void affinity_row_f32(const float* query, const float* emb_t, const float* prob_t,
                      std::size_t n, std::size_t d, std::size_t c, float* acc, float* ksum) {
  for (std::size_t l = 0; l < c; ++l) acc[l] = 0.0f;
  float ks = 0.0f;
  for (std::size_t j = 0; j < n; ++j) {
    float k = 0.0f;
    for (std::size_t t = 0; t < d; ++t) k += query[t] * emb_t[t * n + j];
    if (k < 0.0f) k = 0.0f;
    ks += k;
    for (std::size_t l = 0; l < c; ++l) acc[l] += k * prob_t[l * n + j];
  }
  *ksum = ks;
}

double min_dist_sq_f64(const double* xs, const double* ys, const double* zs, std::size_t n,
                       double qx, double qy, double qz) {
  double best = 1.0 / 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double dx = xs[j] - qx;
    const double dy = ys[j] - qy;
    const double dz = zs[j] - qz;
    const double d = dx * dx + dy * dy + dz * dz;
    if (d < best) best = d;
  }
  return best;
}

}  // namespace ocs::kern::scalar

namespace ocs::kern {

const Kernels& scalar_kernels() {
  static const Kernels k = {
      &scalar::dot_f32,         &scalar::dot_f64,         &scalar::sum_f64,
      &scalar::sum_sq_f64,      &scalar::sum_abs_diff_f64, &scalar::sum_sq_diff_f64,
      &scalar::affinity_row_f32, &scalar::min_dist_sq_f64,
  };
  return k;
}

}  // namespace ocs::kern
