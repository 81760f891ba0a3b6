#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ocs/core/error.hpp"
#include "ocs/core/rng.hpp"
#include "ocs/core/tensor.hpp"
#include "ocs/gs/gaussians.hpp"

using namespace ocs;

namespace {

constexpr double kPi = 3.14159265358979323846;

Sim3 random_sim3(Rng& rng) {
  Sim3 t;
  t.scale = rng.uniform(0.5, 2.0);
  const Vec3 axis{rng.normal(), rng.normal(), rng.normal()};
  t.rotation = Quat::from_axis_angle(axis.normalized(), rng.uniform(0, 2 * kPi)).canonical();
  t.translation = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
  return t;
}

}  // namespace

TEST_CASE("materialize: zero offset lands on the back-projected point") {
  const auto cam = intrinsics_from_fov(1.0, 1.0, 8, 8);
  Tensor<float> params({8, 8, 2, 14});
  Tensor<float> depth({8, 8}, 2.0f);
  for (std::size_t p = 0; p < 64; ++p)
    for (int g = 0; g < 2; ++g) {
      params[p * 28 + g * 14 + 6] = 1.0f;  // quat w
      params[p * 28 + g * 14 + 10] = 0.0f; // opacity logit -> 0.5
    }
  const std::vector<std::uint32_t> pixels = {9};  // (u=1, v=1)
  const auto set = gs::materialize(params.data(), depth.data(), 8, 8, 2, pixels, cam);
  REQUIRE(set.size() == 2);  // 1 pixel, k=2 -> exactly 2 primitives
  CHECK(set.frame == gs::Frame::Camera);
  const Vec3 want = backproject(1, 1, 2.0, cam);
  CHECK((set.primitives[0].mean - want).norm() < 1e-12);
  CHECK(set.primitives[0].opacity == doctest::Approx(0.5));  // sigmoid(0)
  CHECK(set.source_pixel[0] == 9);
  CHECK(set.source_pixel[1] == 9);
}

TEST_CASE("materialize: offsets shift the mean; non-finite parameter errors") {
  const auto cam = intrinsics_from_fov(1.0, 1.0, 4, 4);
  Tensor<float> params({4, 4, 1, 14});
  Tensor<float> depth({4, 4}, 1.0f);
  const std::size_t pix = 5;
  params[pix * 14 + 0] = 0.1f;
  params[pix * 14 + 1] = -0.2f;
  params[pix * 14 + 2] = 0.3f;
  params[pix * 14 + 6] = 1.0f;
  const auto set = gs::materialize(params.data(), depth.data(), 4, 4, 1, {pix}, cam);
  const Vec3 anchor = backproject(1, 1, 1.0, cam);
  CHECK((set.primitives[0].mean - (anchor + Vec3{0.1, -0.2, 0.3})).norm() < 1e-6);

  params[pix * 14 + 3] = std::nanf("");
  CHECK_THROWS_WITH_AS(gs::materialize(params.data(), depth.data(), 4, 4, 1, {pix}, cam),
                       doctest::Contains("(1, 1)"), DomainError);
}

TEST_CASE("materialized set size is pixels x k") {
  const auto cam = intrinsics_from_fov(1.0, 1.0, 16, 16);
  Tensor<float> params({16, 16, 3, 14});
  Tensor<float> depth({16, 16}, 1.5f);
  for (std::size_t p = 0; p < 256; ++p)
    for (int g = 0; g < 3; ++g) params[(p * 3 + g) * 14 + 6] = 1.0f;
  std::vector<std::uint32_t> pixels;
  for (std::uint32_t p = 0; p < 256; p += 7) pixels.push_back(p);
  const auto set = gs::materialize(params.data(), depth.data(), 16, 16, 3, pixels, cam);
  CHECK(set.size() == pixels.size() * 3);
}

TEST_CASE("to_canonical identity pose is the identity") {
  Rng rng(2);
  gs::GaussianSet set;
  for (int i = 0; i < 10; ++i) {
    gs::GaussianPrimitive p;
    p.mean = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(1, 3)};
    p.log_scale = {rng.uniform(-3, 0), rng.uniform(-3, 0), rng.uniform(-3, 0)};
    const Vec3 ax{rng.normal(), rng.normal(), rng.normal()};
    p.rotation = Quat::from_axis_angle(ax.normalized(), rng.uniform(0, 6)).canonical();
    p.opacity = rng.uniform(0.1, 0.9);
    p.color = {rng.uniform(), rng.uniform(), rng.uniform()};
    set.primitives.push_back(p);
  }
  for (const auto mode : {gs::CanonicalizeMode::MeansOnly, gs::CanonicalizeMode::FullSim3}) {
    const auto out = gs::to_canonical(set, Sim3::identity(), mode);
    CHECK(out.frame == gs::Frame::Canonical);
    for (std::size_t i = 0; i < set.size(); ++i) {
      CHECK((out.primitives[i].mean - set.primitives[i].mean).norm() < 1e-12);
      CHECK((out.primitives[i].log_scale - set.primitives[i].log_scale).norm() < 1e-12);
    }
  }
}

TEST_CASE("to_canonical means-only: scale-2 pose halves the mean only") {
  gs::GaussianSet set;
  gs::GaussianPrimitive p;
  p.mean = {2, 0, 0};
  p.log_scale = {-1, -1, -1};
  set.primitives.push_back(p);
  Sim3 pose;
  pose.scale = 2.0;
  const auto out = gs::to_canonical(set, pose, gs::CanonicalizeMode::MeansOnly);
  CHECK((out.primitives[0].mean - Vec3{1, 0, 0}).norm() < 1e-12);
  CHECK((out.primitives[0].log_scale - p.log_scale).norm() < 1e-15);
  CHECK(std::abs(out.primitives[0].rotation.w - 1.0) < 1e-15);
}

TEST_CASE("to_canonical full-sim3 transforms the covariance correctly") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    gs::GaussianPrimitive p;
    p.mean = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    p.log_scale = {rng.uniform(-2, 0.5), rng.uniform(-2, 0.5), rng.uniform(-2, 0.5)};
    const Vec3 ax{rng.normal(), rng.normal(), rng.normal()};
    p.rotation = Quat::from_axis_angle(ax.normalized(), rng.uniform(0, 6)).canonical();
    gs::GaussianSet set;
    set.primitives.push_back(p);

    const Sim3 pose = random_sim3(rng);
    const auto out = gs::to_canonical(set, pose, gs::CanonicalizeMode::FullSim3);

    // covariance identity: Sigma_can = s^-2 R^T Sigma R
    const Mat3 sigma = p.covariance();
    const Mat3 r = pose.rotation.to_matrix();
    const Mat3 want = (r.transposed() * sigma * r) * (1.0 / (pose.scale * pose.scale));
    const Mat3 got = out.primitives[0].covariance();
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) CHECK(std::abs(got(a, b) - want(a, b)) < 1e-9);
  }
}

TEST_CASE("to_canonical round trips through the inverse pose") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    gs::GaussianPrimitive p;
    p.mean = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(1, 2)};
    p.log_scale = {rng.uniform(-2, 0), rng.uniform(-2, 0), rng.uniform(-2, 0)};
    const Vec3 ax{rng.normal(), rng.normal(), rng.normal()};
    p.rotation = Quat::from_axis_angle(ax.normalized(), rng.uniform(0, 6)).canonical();
    gs::GaussianSet set;
    set.primitives.push_back(p);

    const Sim3 pose = random_sim3(rng);
    // means-only: only means must round trip
    const auto canon = gs::to_canonical(set, pose, gs::CanonicalizeMode::MeansOnly);
    const auto back = gs::apply_sim3(canon, pose, gs::CanonicalizeMode::MeansOnly,
                                     gs::Frame::Camera);
    CHECK((back.primitives[0].mean - p.mean).norm() < 1e-9);

    // full-sim3: every parameter round trips
    const auto canon_f = gs::to_canonical(set, pose, gs::CanonicalizeMode::FullSim3);
    const auto back_f =
        gs::apply_sim3(canon_f, pose, gs::CanonicalizeMode::FullSim3, gs::Frame::Camera);
    CHECK((back_f.primitives[0].mean - p.mean).norm() < 1e-9);
    CHECK((back_f.primitives[0].log_scale - p.log_scale).norm() < 1e-9);
    const Quat qa = back_f.primitives[0].rotation.canonical();
    const Quat qb = p.rotation.canonical();
    CHECK(std::abs(qa.w - qb.w) < 1e-9);
    CHECK(std::abs(qa.x - qb.x) < 1e-9);
  }
}

TEST_CASE("covariance stays positive definite for finite log scales") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    gs::GaussianPrimitive p;
    p.log_scale = {rng.uniform(-8, 3), rng.uniform(-8, 3), rng.uniform(-8, 3)};
    const Vec3 ax{rng.normal(), rng.normal(), rng.normal()};
    p.rotation = Quat::from_axis_angle(ax.normalized(), rng.uniform(0, 6)).canonical();
    const Mat3 c = p.covariance();
    // symmetric
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) CHECK(std::abs(c(a, b) - c(b, a)) < 1e-12);
    // positive definite via leading principal minors
    CHECK(c(0, 0) > 0);
    CHECK(c(0, 0) * c(1, 1) - c(0, 1) * c(1, 0) > 0);
    CHECK(c.det() > 0);
  }
}

TEST_CASE("offset regularizer hinge cases") {
  CHECK(gs::offset_regularizer({{0, 0, 0}, {0, 0, 0}}, 0.1) == doctest::Approx(0.0));
  CHECK(gs::offset_regularizer({{0.2, 0, 0}}, 0.1) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(gs::offset_regularizer({{0.05, 0, 0}}, 0.1) == doctest::Approx(0.0));
  // sums over entries; L1 norm inside
  CHECK(gs::offset_regularizer({{0.1, -0.1, 0.1}, {0.0, 0.2, 0.0}}, 0.05) ==
        doctest::Approx((0.3 - 0.05) + (0.2 - 0.05)).epsilon(1e-12));
  CHECK_THROWS_AS(gs::offset_regularizer({}, -0.1), DomainError);
}

TEST_CASE("logit/sigmoid are inverses on (0,1)") {
  Rng rng(6);
  for (int i = 0; i < 1000; ++i) {
    const double p = rng.uniform(1e-6, 1.0 - 1e-6);
    CHECK(gs::sigmoid(gs::logit(p)) == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK_THROWS_AS(gs::logit(0.0), DomainError);
  CHECK_THROWS_AS(gs::logit(1.0), DomainError);
}
