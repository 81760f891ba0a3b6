#pragma once

#include <cstddef>
#include <string>

namespace ocs::kern {

// Data-parallel inner loops with scalar reference implementations and
// AVX2/FMA variants selected once at startup via CPUID. SIMD variants are
// equivalence-tested against the scalar references; results may differ by
// rounding (different accumulation order), never structurally.
struct Kernels {
  // sum_i a[i] * b[i]
  float (*dot_f32)(const float* a, const float* b, std::size_t n);
  double (*dot_f64)(const double* a, const double* b, std::size_t n);

  double (*sum_f64)(const double* a, std::size_t n);
  double (*sum_sq_f64)(const double* a, std::size_t n);
  // sum_i |a[i] - b[i]| and sum_i (a[i] - b[i])^2
  double (*sum_abs_diff_f64)(const double* a, const double* b, std::size_t n);
  double (*sum_sq_diff_f64)(const double* a, const double* b, std::size_t n);

  // Mean-field message gather for one pixel against the whole field.
  //   k_j   = max(0, dot(query, emb_t[:, j]))          (cosine affinity)
  //   acc[l] += sum_j k_j * prob_t[l][j],  ksum = sum_j k_j
  // emb_t is d x n planar (row per dimension), prob_t is c x n planar.
  void (*affinity_row_f32)(const float* query, const float* emb_t, const float* prob_t,
                           std::size_t n, std::size_t d, std::size_t c, float* acc,
                           float* ksum);

  // min_j (xs[j]-qx)^2 + (ys[j]-qy)^2 + (zs[j]-qz)^2 over SoA points.
  double (*min_dist_sq_f64)(const double* xs, const double* ys, const double* zs,
                            std::size_t n, double qx, double qy, double qz);
};

/// Active kernel table (runtime-dispatched).
const Kernels& kernels();

/// Portable scalar reference table.
const Kernels& scalar_kernels();

/// Name of the active variant ("scalar", "avx2").
const std::string& active_variant();

/// Force the scalar path (flag / tests). Must be called before first use or
/// takes effect from the next kernels() call.
void force_scalar(bool on);

bool cpu_supports_avx2();

}  // namespace ocs::kern
