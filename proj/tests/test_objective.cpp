#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ocs/core/rng.hpp"
#include "ocs/objective/losses.hpp"

using namespace ocs;
using objective::combine;
using objective::camera_fov_loss;

TEST_CASE("combine stationary point at L=1, s=0") {
  std::array<double, 5> losses{1, 1, 1, 1, 1};
  std::array<double, 5> s{0, 0, 0, 0, 0};
  const auto r = combine(losses, s);
  CHECK(r.total == doctest::Approx(5.0));
  for (double g : r.grad_s) CHECK(g == doctest::Approx(0.0));
}

TEST_CASE("combine single-task example L=e") {
  const double e = std::exp(1.0);
  std::array<double, 5> losses{e, 0, 0, 0, 0};
  std::array<double, 5> s{0, 0, 0, 0, 0};
  const auto r = combine(losses, s);
  CHECK(r.total == doctest::Approx(e));
  CHECK(r.grad_s[0] == doctest::Approx(1.0 - e));
  // minimizer s* = ln L: gradient vanishes there
  std::array<double, 5> s_star{1.0, 0, 0, 0, 0};
  CHECK(combine(losses, s_star).grad_s[0] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("combine gradient matches central differences") {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    std::array<double, 5> losses, s;
    for (int t = 0; t < 5; ++t) {
      losses[t] = rng.uniform(0.0, 5.0);
      s[t] = rng.uniform(-2.0, 2.0);
    }
    const auto r = combine(losses, s);
    const double h = 1e-6;
    for (int t = 0; t < 5; ++t) {
      auto sp = s, sm = s;
      sp[t] += h;
      sm[t] -= h;
      const double fd = (combine(losses, sp).total - combine(losses, sm).total) / (2 * h);
      CHECK(std::abs(r.grad_s[t] - fd) < 1e-8);
    }
    // gradient vanishes exactly at s = ln L for positive losses
    for (int t = 0; t < 5; ++t)
      if (losses[t] > 1e-12) {
        auto s2 = s;
        s2[t] = std::log(losses[t]);
        CHECK(std::abs(combine(losses, s2).grad_s[t]) < 1e-12);
      }
  }
}

TEST_CASE("camera fov loss branches") {
  CHECK(camera_fov_loss(1.0, 1.2, 1.0, 1.2, 0.1) == doctest::Approx(0.0));
  // quadratic branch: r <= delta -> r^2/2 per axis
  const double d = 0.1;
  CHECK(camera_fov_loss(1.05, 1.0, 1.0, 1.0, d) ==
        doctest::Approx(0.5 * 0.05 * 0.05).epsilon(1e-12));
  // linear branch at r = 2 delta: 1.5 delta^2 per axis
  CHECK(camera_fov_loss(1.0 + 2 * d, 1.0, 1.0, 1.0, d) ==
        doctest::Approx(1.5 * d * d).epsilon(1e-12));
  CHECK(camera_fov_loss(1.0 + 2 * d, 1.0 + 2 * d, 1.0, 1.0, d) ==
        doctest::Approx(3.0 * d * d).epsilon(1e-12));
}

TEST_CASE("huber is C1 at the transition") {
  const double d = 0.1, eps = 1e-9;
  const double below = (objective::huber(d, d) - objective::huber(d - eps, d)) / eps;
  const double above = (objective::huber(d + eps, d) - objective::huber(d, d)) / eps;
  CHECK(below == doctest::Approx(above).epsilon(1e-5));
  CHECK(objective::huber(d, d) == doctest::Approx(0.5 * d * d));
}
