#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "ocs/core/rng.hpp"
#include "ocs/kernels/kernels.hpp"

using namespace ocs;

// SIMD variants must agree with the scalar references up to reassociation
// rounding. Sizes cover remainders around the vector widths.

namespace {

std::vector<float> random_f32(Rng& rng, std::size_t n, float lo = -1.0f, float hi = 1.0f) {
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.uniform(lo, hi));
  return v;
}

std::vector<double> random_f64(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("active variant reports something sane") {
  const auto& name = kern::active_variant();
  CHECK((name == "scalar" || name == "avx2"));
  MESSAGE("active kernel variant: ", name);
}

TEST_CASE("dot agrees between variants") {
  const auto& simd = kern::kernels();
  const auto& ref = kern::scalar_kernels();
  Rng rng(101);
  for (std::size_t n : {0u, 1u, 3u, 7u, 8u, 9u, 15u, 16u, 17u, 100u, 1000u, 10001u}) {
    const auto a = random_f32(rng, n);
    const auto b = random_f32(rng, n);
    const double got = simd.dot_f32(a.data(), b.data(), n);
    const double want = ref.dot_f32(a.data(), b.data(), n);
    CHECK(std::abs(got - want) <= 1e-4 * (1.0 + std::abs(want)));

    const auto ad = random_f64(rng, n);
    const auto bd = random_f64(rng, n);
    CHECK(simd.dot_f64(ad.data(), bd.data(), n) ==
          doctest::Approx(ref.dot_f64(ad.data(), bd.data(), n)).epsilon(1e-12));
  }
}

TEST_CASE("f64 reductions agree between variants") {
  const auto& simd = kern::kernels();
  const auto& ref = kern::scalar_kernels();
  Rng rng(202);
  for (std::size_t n : {1u, 5u, 64u, 1023u, 40000u}) {
    const auto a = random_f64(rng, n, -3, 3);
    const auto b = random_f64(rng, n, -3, 3);
    CHECK(simd.sum_f64(a.data(), n) ==
          doctest::Approx(ref.sum_f64(a.data(), n)).epsilon(1e-12));
    CHECK(simd.sum_sq_f64(a.data(), n) ==
          doctest::Approx(ref.sum_sq_f64(a.data(), n)).epsilon(1e-12));
    CHECK(simd.sum_abs_diff_f64(a.data(), b.data(), n) ==
          doctest::Approx(ref.sum_abs_diff_f64(a.data(), b.data(), n)).epsilon(1e-12));
    CHECK(simd.sum_sq_diff_f64(a.data(), b.data(), n) ==
          doctest::Approx(ref.sum_sq_diff_f64(a.data(), b.data(), n)).epsilon(1e-12));
  }
}

TEST_CASE("affinity gather agrees between variants") {
  const auto& simd = kern::kernels();
  const auto& ref = kern::scalar_kernels();
  Rng rng(303);
  for (const auto [n, d, c] :
       std::vector<std::array<std::size_t, 3>>{{16, 8, 3}, {100, 16, 13}, {1037, 16, 7}}) {
    const auto query = random_f32(rng, d);
    const auto emb_t = random_f32(rng, d * n);
    auto prob_t = random_f32(rng, c * n, 0.0f, 1.0f);
    std::vector<float> acc_a(c), acc_b(c);
    float ks_a = 0, ks_b = 0;
    simd.affinity_row_f32(query.data(), emb_t.data(), prob_t.data(), n, d, c, acc_a.data(),
                          &ks_a);
    ref.affinity_row_f32(query.data(), emb_t.data(), prob_t.data(), n, d, c, acc_b.data(),
                         &ks_b);
    CHECK(std::abs(ks_a - ks_b) <= 2e-3f * (1.0f + std::abs(ks_b)));
    for (std::size_t l = 0; l < c; ++l)
      CHECK(std::abs(acc_a[l] - acc_b[l]) <= 2e-3f * (1.0f + std::abs(acc_b[l])));
  }
}

TEST_CASE("min_dist_sq agrees between variants") {
  const auto& simd = kern::kernels();
  const auto& ref = kern::scalar_kernels();
  Rng rng(404);
  for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 100u, 1001u}) {
    const auto xs = random_f64(rng, n);
    const auto ys = random_f64(rng, n);
    const auto zs = random_f64(rng, n);
    for (int q = 0; q < 20; ++q) {
      const double qx = rng.uniform(-2, 2), qy = rng.uniform(-2, 2), qz = rng.uniform(-2, 2);
      const double got = simd.min_dist_sq_f64(xs.data(), ys.data(), zs.data(), n, qx, qy, qz);
      const double want = ref.min_dist_sq_f64(xs.data(), ys.data(), zs.data(), n, qx, qy, qz);
      CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("force_scalar switches the dispatch") {
  kern::force_scalar(true);
  CHECK(kern::active_variant() == "scalar");
  kern::force_scalar(false);
}
