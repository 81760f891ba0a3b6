// AVX2/FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma; callers reach it only through the runtime dispatch table.

#include <cstddef>

#include "ocs/kernels/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

namespace ocs::kern::avx2 {

static inline float hsum256_ps(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 sh = _mm_movehdup_ps(lo);
  __m128 s = _mm_add_ps(lo, sh);
  sh = _mm_movehl_ps(sh, s);
  s = _mm_add_ss(s, sh);
  return _mm_cvtss_f32(s);
}

static inline double hsum256_pd(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

float dot_f32(const float* a, const float* b, std::size_t n) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), acc1);
  }
  for (; i + 8 <= n; i += 8)
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
  float s = hsum256_ps(_mm256_add_ps(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot_f64(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double s = hsum256_pd(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_f64(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  double s = hsum256_pd(acc);
  for (; i < n; ++i) s += a[i];
  return s;
}

double sum_sq_f64(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(a + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum256_pd(acc);
  for (; i < n; ++i) s += a[i] * a[i];
  return s;
}

double sum_abs_diff_f64(const double* a, const double* b, std::size_t n) {
  const __m256d signmask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(signmask, d));
  }
  double s = hsum256_pd(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d < 0 ? -d : d;
  }
  return s;
}

double sum_sq_diff_f64(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum256_pd(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void affinity_row_f32(const float* query, const float* emb_t, const float* prob_t,
                      std::size_t n, std::size_t d, std::size_t c, float* acc, float* ksum) {
  // Per-label 8-lane accumulators kept in a small scratch buffer so any
  // vocabulary size works without spilling registers.
  alignas(32) float lane_acc[8 * 64];
  float* lanes = lane_acc;
  const bool heap = c > 64;
  float* heap_buf = nullptr;
  if (heap) {
    heap_buf = new float[8 * c];
    lanes = heap_buf;
  }
  for (std::size_t i = 0; i < 8 * c; ++i) lanes[i] = 0.0f;

  const __m256 zero = _mm256_setzero_ps();
  __m256 ks = zero;
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    __m256 k = zero;
    for (std::size_t t = 0; t < d; ++t)
      k = _mm256_fmadd_ps(_mm256_set1_ps(query[t]), _mm256_loadu_ps(emb_t + t * n + j), k);
    k = _mm256_max_ps(k, zero);
    ks = _mm256_add_ps(ks, k);
    for (std::size_t l = 0; l < c; ++l) {
      __m256 a = _mm256_load_ps(lanes + 8 * l);
      a = _mm256_fmadd_ps(k, _mm256_loadu_ps(prob_t + l * n + j), a);
      _mm256_store_ps(lanes + 8 * l, a);
    }
  }
  float ks_s = hsum256_ps(ks);
  for (std::size_t l = 0; l < c; ++l) {
    __m256 a = _mm256_load_ps(lanes + 8 * l);
    acc[l] = hsum256_ps(a);
  }
  for (; j < n; ++j) {
    float k = 0.0f;
    for (std::size_t t = 0; t < d; ++t) k += query[t] * emb_t[t * n + j];
    if (k < 0.0f) k = 0.0f;
    ks_s += k;
    for (std::size_t l = 0; l < c; ++l) acc[l] += k * prob_t[l * n + j];
  }
  *ksum = ks_s;
  delete[] heap_buf;
}

double min_dist_sq_f64(const double* xs, const double* ys, const double* zs, std::size_t n,
                       double qx, double qy, double qz) {
  const __m256d vqx = _mm256_set1_pd(qx);
  const __m256d vqy = _mm256_set1_pd(qy);
  const __m256d vqz = _mm256_set1_pd(qz);
  __m256d best = _mm256_set1_pd(1.0 / 0.0);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + j), vqx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + j), vqy);
    const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(zs + j), vqz);
    const __m256d d =
        _mm256_fmadd_pd(dz, dz, _mm256_fmadd_pd(dy, dy, _mm256_mul_pd(dx, dx)));
    best = _mm256_min_pd(best, d);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, best);
  double b = lanes[0];
  for (int i = 1; i < 4; ++i)
    if (lanes[i] < b) b = lanes[i];
  for (; j < n; ++j) {
    const double dx = xs[j] - qx;
    const double dy = ys[j] - qy;
    const double dz = zs[j] - qz;
    const double d = dx * dx + dy * dy + dz * dz;
    if (d < b) b = d;
  }
  return b;
}

}  // namespace ocs::kern::avx2

namespace ocs::kern {

const Kernels* avx2_kernels() {
  static const Kernels k = {
      &avx2::dot_f32,          &avx2::dot_f64,          &avx2::sum_f64,
      &avx2::sum_sq_f64,       &avx2::sum_abs_diff_f64, &avx2::sum_sq_diff_f64,
      &avx2::affinity_row_f32, &avx2::min_dist_sq_f64,
  };
  return &k;
}

}  // namespace ocs::kern

#else

namespace ocs::kern {
const Kernels* avx2_kernels() { return nullptr; }
}  // namespace ocs::kern

#endif
