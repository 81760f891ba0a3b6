#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>

#include "common/reference_impls.hpp"
#include "ocs/core/error.hpp"
#include "ocs/core/rng.hpp"
#include "ocs/eval3d/eval3d.hpp"
#include "ocs/eval3d/match.hpp"

using namespace ocs;

namespace {

std::vector<Vec3> random_cloud(Rng& rng, std::size_t n, double lo = 0.0, double hi = 1.0) {
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < n; ++i)
    pts.push_back({rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)});
  return pts;
}

std::vector<std::array<double, 3>> as_arrays(const std::vector<Vec3>& v) {
  std::vector<std::array<double, 3>> out;
  for (const auto& p : v) out.push_back({p.x, p.y, p.z});
  return out;
}

}  // namespace

TEST_CASE("chamfer basics") {
  const std::vector<Vec3> a = {{0, 0, 0}};
  const std::vector<Vec3> b = {{1, 0, 0}};
  CHECK(eval3d::chamfer(a, a) == doctest::Approx(0.0));
  CHECK(eval3d::chamfer(a, b) == doctest::Approx(2.0));  // 1.0 each direction
  CHECK_THROWS_AS(eval3d::chamfer({}, b), DomainError);
}

TEST_CASE("chamfer matches the O(n^2) reference and is symmetric") {
  Rng rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = random_cloud(rng, 20 + rng.uniform_index(180));
    const auto b = random_cloud(rng, 20 + rng.uniform_index(180));
    const double got = eval3d::chamfer(a, b);
    CHECK(got == doctest::Approx(refimpl::chamfer(as_arrays(a), as_arrays(b))).epsilon(1e-12));
    CHECK(got == doctest::Approx(eval3d::chamfer(b, a)).epsilon(1e-12));
  }
}

TEST_CASE("chamfer is rigid-motion invariant when both clouds move") {
  Rng rng(2);
  const auto a = random_cloud(rng, 100);
  const auto b = random_cloud(rng, 120);
  const double base = eval3d::chamfer(a, b);
  const Vec3 axis{rng.normal(), rng.normal(), rng.normal()};
  const Quat q = Quat::from_axis_angle(axis.normalized(), 1.234);
  const Vec3 t{0.3, -0.7, 2.0};
  auto move = [&](std::vector<Vec3> pts) {
    for (auto& p : pts) p = q.rotate(p) + t;
    return pts;
  };
  CHECK(eval3d::chamfer(move(a), move(b)) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("grid nearest neighbor equals brute force") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto cloud = random_cloud(rng, 30 + rng.uniform_index(170));
    const eval3d::PointGrid grid(cloud);
    for (int q = 0; q < 50; ++q) {
      const Vec3 query{rng.uniform(-0.5, 1.5), rng.uniform(-0.5, 1.5),
                       rng.uniform(-0.5, 1.5)};
      CHECK(grid.min_dist_sq(query) ==
            doctest::Approx(eval3d::min_dist_sq_brute(cloud, query)).epsilon(1e-12));
    }
  }
  // large cloud: grid path actually used by chamfer
  const auto big = random_cloud(rng, 3000);
  const auto small = random_cloud(rng, 50);
  const eval3d::PointGrid grid(big);
  for (const auto& q : small)
    CHECK(grid.min_dist_sq(q) ==
          doctest::Approx(eval3d::min_dist_sq_brute(big, q)).epsilon(1e-12));
}

TEST_CASE("grid handles degenerate (flat / tiny) clouds") {
  std::vector<Vec3> flat;
  Rng rng(4);
  for (int i = 0; i < 60; ++i) flat.push_back({rng.uniform(), rng.uniform(), 0.25});
  const eval3d::PointGrid grid(flat);
  for (int q = 0; q < 30; ++q) {
    const Vec3 query{rng.uniform(), rng.uniform(), rng.uniform()};
    CHECK(grid.min_dist_sq(query) ==
          doctest::Approx(eval3d::min_dist_sq_brute(flat, query)).epsilon(1e-12));
  }
  const eval3d::PointGrid one(std::vector<Vec3>{{0.5, 0.5, 0.5}});
  CHECK(one.min_dist_sq({1, 1, 1}) == doctest::Approx(0.75));
}

TEST_CASE("fscore basics") {
  Rng rng(5);
  const auto a = random_cloud(rng, 64);
  CHECK(eval3d::fscore(a, a, 0.1) == doctest::Approx(100.0));
  std::vector<Vec3> far = a;
  for (auto& p : far) p.x += 10.0;
  CHECK(eval3d::fscore(a, far, 0.1) == doctest::Approx(0.0));
  CHECK_THROWS_AS(eval3d::fscore({}, a, 0.1), DomainError);
  CHECK_THROWS_AS(eval3d::fscore(a, a, 0.0), DomainError);
}

TEST_CASE("fscore matches the reference; monotone in the threshold; symmetric") {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_cloud(rng, 30 + rng.uniform_index(120));
    const auto b = random_cloud(rng, 30 + rng.uniform_index(120));
    const double t1 = rng.uniform(0.02, 0.2);
    const double t2 = t1 + rng.uniform(0.01, 0.3);
    CHECK(eval3d::fscore(a, b, t1) ==
          doctest::Approx(refimpl::fscore(as_arrays(a), as_arrays(b), t1)).epsilon(1e-12));
    CHECK(eval3d::fscore(a, b, t1) <= eval3d::fscore(a, b, t2) + 1e-12);
    CHECK(eval3d::fscore(a, b, t1) == doctest::Approx(eval3d::fscore(b, a, t1)));
  }
}

TEST_CASE("fscore is scale covariant") {
  Rng rng(7);
  const auto a = random_cloud(rng, 80);
  const auto b = random_cloud(rng, 90);
  const double base = eval3d::fscore(a, b, 0.1);
  auto scale = [&](std::vector<Vec3> pts, double c) {
    for (auto& p : pts) p *= c;
    return pts;
  };
  CHECK(eval3d::fscore(scale(a, 3.0), scale(b, 3.0), 0.3) == doctest::Approx(base));
}

TEST_CASE("hungarian assignment on small cost matrices") {
  // classic 3x3
  const std::vector<double> cost = {4, 1, 3, 2, 0, 5, 3, 2, 2};
  const auto a = eval3d::hungarian_assign(cost, 3, 3);
  REQUIRE(a.size() == 3);
  // optimal: (0,1),(1,0),(2,2) = 1 + 2 + 2 = 5
  CHECK(a[0] == 1);
  CHECK(a[1] == 0);
  CHECK(a[2] == 2);

  // rectangular: 2 rows, 3 cols
  const std::vector<double> rect = {1, 9, 9, 9, 9, 1};
  const auto b = eval3d::hungarian_assign(rect, 2, 3);
  CHECK(b[0] == 0);
  CHECK(b[1] == 2);

  // more rows than columns: one row stays unassigned
  const std::vector<double> tall = {1, 9, 2, 9, 9, 1};
  const auto c = eval3d::hungarian_assign(tall, 3, 2);
  int assigned = 0;
  for (int v : c) assigned += v >= 0;
  CHECK(assigned == 2);
}

TEST_CASE("hungarian beats greedy on a crafted trap") {
  // greedy picks (0,0)=0 then forces (1,1)=10; optimal total is 2.
  const std::vector<double> cost = {0, 1, 1, 10};
  const auto a = eval3d::hungarian_assign(cost, 2, 2);
  CHECK(a[0] == 1);
  CHECK(a[1] == 0);
}
