#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "common/reference_impls.hpp"
#include "ocs/core/rng.hpp"
#include "ocs/depth/depth.hpp"

using namespace ocs;

namespace {

CameraIntrinsics cam(double f_w, int w, int h) {
  CameraIntrinsics k;
  k.f_w = f_w;
  k.f_h = f_w;
  k.c_x = w / 2.0;
  k.c_y = h / 2.0;
  k.width = w;
  k.height = h;
  return k;
}

}  // namespace

TEST_CASE("canonical inverse depth conversion") {
  Tensor<float> d({1, 1});
  d[0] = 2.0f;
  auto c = depth::to_canonical_inverse(d, cam(500, 1000, 1000));
  CHECK(c[0] == doctest::Approx(0.25));

  d[0] = 0.5f;
  c = depth::to_canonical_inverse(d, cam(259, 518, 518));
  CHECK(c[0] == doctest::Approx(1.0));

  // C = 1, f_w = W -> d = 1
  Tensor<float> one({1, 1});
  one[0] = 1.0f;
  CHECK(depth::from_canonical_inverse(one, cam(640, 640, 480))[0] == doctest::Approx(1.0));
}

TEST_CASE("canonical inverse round trip") {
  Rng rng(7);
  Tensor<float> d({16, 16});
  for (auto& v : d.storage()) v = static_cast<float>(rng.uniform(0.1, 20.0));
  const auto k = cam(500, 640, 480);
  const auto back = depth::from_canonical_inverse(depth::to_canonical_inverse(d, k), k);
  for (std::size_t i = 0; i < d.size(); ++i)
    CHECK(back[i] == doctest::Approx(d[i]).epsilon(1e-6));
}

TEST_CASE("nonpositive values are rejected with the pixel named") {
  Tensor<float> d({2, 2});
  d[0] = 1.0f;
  d[1] = 1.0f;
  d[2] = 0.0f;
  d[3] = 1.0f;
  const auto k = cam(100, 2, 2);
  CHECK_THROWS_WITH_AS(depth::to_canonical_inverse(d, k),
                       doctest::Contains("pixel (0, 1)"), DomainError);
  CHECK_THROWS_AS(depth::from_canonical_inverse(d, k), DomainError);
}

TEST_CASE("depth_loss: zero and constant residuals") {
  Tensor<float> a({4, 4}), b({4, 4});
  for (auto& v : a.storage()) v = 0.7f;
  b = a;
  CHECK(depth::depth_loss(a, b, 1.0) == doctest::Approx(0.0));

  for (auto& v : b.storage()) v = 0.2f;  // constant residual 0.5
  CHECK(depth::depth_loss(a, b, 123.0) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("depth_loss matches the straight-line reference") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t h = 3 + trial % 5, w = 4 + trial % 3;
    Tensor<float> a({h, w}), b({h, w});
    std::vector<double> ad(h * w), bd(h * w);
    for (std::size_t i = 0; i < h * w; ++i) {
      a[i] = static_cast<float>(rng.uniform(0.1, 2.0));
      b[i] = static_cast<float>(rng.uniform(0.1, 2.0));
      ad[i] = a[i];
      bd[i] = b[i];
    }
    const double lam = rng.uniform(0.0, 2.0);
    CHECK(depth::depth_loss(a, b, lam) ==
          doctest::Approx(refimpl::depth_loss(ad, bd, h, w, lam)).epsilon(1e-12));
  }

  // x-ramp residual on 4x4: reference computed by the independent loop
  Tensor<float> zero({4, 4}), ramp({4, 4});
  std::vector<double> rd(16), zd(16, 0.0);
  for (std::size_t y = 0; y < 4; ++y)
    for (std::size_t x = 0; x < 4; ++x) {
      ramp.at(y, x) = 0.25f * static_cast<float>(x);
      rd[y * 4 + x] = 0.25 * x;
    }
  CHECK(depth::depth_loss(ramp, zero, 1.0) ==
        doctest::Approx(refimpl::depth_loss(rd, zd, 4, 4, 1.0)).epsilon(1e-12));
}

TEST_CASE("eval_depth trivial identities") {
  Tensor<float> g({8, 8});
  Rng rng(3);
  for (auto& v : g.storage()) v = static_cast<float>(rng.uniform(0.2, 5.0));
  const auto r = depth::eval_depth(g, g, {});
  CHECK(r.delta1 == doctest::Approx(100.0));
  CHECK(r.abs_rel == doctest::Approx(0.0));
  CHECK(r.rmse == doctest::Approx(0.0));
  CHECK(r.silog == doctest::Approx(0.0));
}

TEST_CASE("eval_depth at ratio 1.3") {
  Tensor<float> g({4, 4}), p({4, 4});
  Rng rng(9);
  for (std::size_t i = 0; i < 16; ++i) {
    g[i] = static_cast<float>(rng.uniform(0.5, 3.0));
    p[i] = 1.3f * g[i];
  }
  const auto r = depth::eval_depth(p, g, {});
  CHECK(r.delta1 == doctest::Approx(0.0));
  CHECK(r.delta2 == doctest::Approx(100.0));
  CHECK(r.abs_rel == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(r.silog == doctest::Approx(0.0).epsilon(1e-6));  // pure scale: zero log variance
}

TEST_CASE("eval_depth matches the straight-line reference") {
  Rng rng(33);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor<float> p({8, 8}), g({8, 8});
    std::vector<double> pd, gd;
    for (std::size_t i = 0; i < 64; ++i) {
      p[i] = static_cast<float>(rng.uniform(0.1, 10.0));
      g[i] = static_cast<float>(rng.uniform(0.1, 10.0));
      pd.push_back(p[i]);
      gd.push_back(g[i]);
    }
    const auto r = depth::eval_depth(p, g, {});
    const auto want = refimpl::depth_metrics(pd, gd);
    CHECK(r.delta1 == doctest::Approx(want.delta1).epsilon(1e-12));
    CHECK(r.delta2 == doctest::Approx(want.delta2).epsilon(1e-12));
    CHECK(r.delta3 == doctest::Approx(want.delta3).epsilon(1e-12));
    CHECK(r.abs_rel == doctest::Approx(want.abs_rel).epsilon(1e-12));
    CHECK(r.log10 == doctest::Approx(want.log10).epsilon(1e-12));
    CHECK(r.rmse == doctest::Approx(want.rmse).epsilon(1e-12));
    CHECK(r.rmse_log == doctest::Approx(want.rmse_log).epsilon(1e-12));
    CHECK(r.silog == doctest::Approx(want.silog).epsilon(1e-10));
    // delta monotone, swap invariance
    CHECK(r.delta1 <= r.delta2);
    CHECK(r.delta2 <= r.delta3);
    const auto swapped = depth::eval_depth(g, p, {});
    CHECK(swapped.delta1 == doctest::Approx(r.delta1));
  }
}

TEST_CASE("masked evaluation equals evaluation on the foreground subset") {
  Rng rng(44);
  Tensor<float> p({6, 6}), g({6, 6});
  Tensor<std::uint8_t> m({6, 6});
  std::vector<float> pf, gf;
  for (std::size_t i = 0; i < 36; ++i) {
    p[i] = static_cast<float>(rng.uniform(0.2, 4.0));
    g[i] = static_cast<float>(rng.uniform(0.2, 4.0));
    m[i] = rng.uniform() < 0.5 ? 1 : 0;
    if (m[i]) {
      pf.push_back(p[i]);
      gf.push_back(g[i]);
    }
  }
  Tensor<float> pv({pf.size(), 1}), gv({pf.size(), 1});
  std::copy(pf.begin(), pf.end(), pv.storage().begin());
  std::copy(gf.begin(), gf.end(), gv.storage().begin());
  const auto masked = depth::eval_depth(p, g, m);
  const auto subset = depth::eval_depth(pv, gv, {});
  CHECK(masked.rmse == doctest::Approx(subset.rmse).epsilon(1e-12));
  CHECK(masked.delta1 == doctest::Approx(subset.delta1).epsilon(1e-12));
  CHECK(masked.silog == doctest::Approx(subset.silog).epsilon(1e-10));
}

TEST_CASE("eval_depth rejects an empty mask") {
  Tensor<float> p({2, 2}, 1.0f), g({2, 2}, 1.0f);
  Tensor<std::uint8_t> m({2, 2});  // all zero
  CHECK_THROWS_AS(depth::eval_depth(p, g, m), DomainError);
}
