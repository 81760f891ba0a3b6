#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ocs/core/parallel.hpp"
#include "ocs/core/rng.hpp"
#include "ocs/render/css.hpp"
#include "ocs/render/raster.hpp"
#include "ocs/render/ssim.hpp"
#include "ocs/render/views.hpp"

using namespace ocs;
using render::CameraPose;
using render::Image;
using render::RasterConfig;
using render::RenderTarget;

namespace {

constexpr double kPi = 3.14159265358979323846;

gs::GaussianPrimitive random_gaussian(Rng& rng) {
  gs::GaussianPrimitive p;
  p.mean = {rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), rng.uniform(1.2, 2.5)};
  p.log_scale = {rng.uniform(-3.0, -1.2), rng.uniform(-3.0, -1.2), rng.uniform(-3.0, -1.2)};
  const Vec3 ax{rng.normal(), rng.normal(), rng.normal()};
  p.rotation = Quat::from_axis_angle(ax.normalized(), rng.uniform(0, 2 * kPi)).canonical();
  p.opacity = rng.uniform(0.15, 0.85);
  p.color = {rng.uniform(), rng.uniform(), rng.uniform()};
  return p;
}

RenderTarget frontal_target(int res, const Vec3& bg = {0, 0, 0}) {
  RenderTarget t;
  t.camera = intrinsics_from_fov(1.0, 1.0, res, res);
  t.background = bg;
  return t;
}

double loss_of(const Image& img, const Image& weights) {
  double s = 0;
  for (std::size_t i = 0; i < img.size(); ++i) s += img[i] * weights[i];
  return s;
}

double rel_err(double a, double b) {
  const double m = std::max(std::abs(a), std::abs(b));
  return m < 1e-6 ? 0.0 : std::abs(a - b) / m;
}

}  // namespace

TEST_CASE("empty set renders the background") {
  const auto img = render::render({}, frontal_target(16, {0.3, 0.5, 0.7}));
  for (std::size_t p = 0; p < 16 * 16; ++p) {
    CHECK(img[3 * p + 0] == doctest::Approx(0.3));
    CHECK(img[3 * p + 1] == doctest::Approx(0.5));
    CHECK(img[3 * p + 2] == doctest::Approx(0.7));
  }
}

TEST_CASE("single on-axis gaussian: peak at the principal point matches the formula") {
  gs::GaussianSet set;
  gs::GaussianPrimitive p;
  p.mean = {0, 0, 2.0};
  p.log_scale = {-2.0, -2.0, -2.0};
  p.opacity = 0.999999;  // "opacity 1" up to the logit representation
  p.color = {1, 1, 1};
  set.primitives.push_back(p);

  const auto target = frontal_target(33);  // odd: a pixel sits exactly on axis
  RasterConfig cfg;
  const auto img = render::render(set, target, cfg);

  // independent direct evaluation: isotropic world cov s^2 I projects to
  // (f^2 s^2 / z^2) I + lowpass
  const double f = target.camera.f_w;
  const double s2 = std::exp(2.0 * -2.0);
  const double a2d = f * f * s2 / (2.0 * 2.0) + cfg.lowpass;
  const double cx = target.camera.c_x, cy = target.camera.c_y;
  double max_val = -1;
  std::size_t max_p = 0;
  for (int y = 0; y < 33; ++y)
    for (int x = 0; x < 33; ++x) {
      const double dx = x - cx, dy = y - cy;
      const double power = -0.5 * (dx * dx + dy * dy) / a2d;
      double alpha = p.opacity * std::exp(power);
      if (power < -0.5 * cfg.cutoff_sigma * cfg.cutoff_sigma || alpha < cfg.alpha_min)
        alpha = 0;
      if (alpha > cfg.alpha_max) alpha = cfg.alpha_max;
      const double want = alpha;  // white on black
      const double got = img.at(y, x, 0);
      CHECK(std::abs(got - want) < 1e-6);
      if (got > max_val) {
        max_val = got;
        max_p = static_cast<std::size_t>(y) * 33 + x;
      }
    }
  // brightness maximal at the principal point
  CHECK(max_p == 16u * 33 + 16);
  // radially monotone decreasing along the center row
  for (int x = 16; x < 32; ++x)
    CHECK(img.at(16, x, 0) >= img.at(16, x + 1, 0) - 1e-12);
}

TEST_CASE("an opaque front gaussian hides the back one") {
  gs::GaussianSet set;
  gs::GaussianPrimitive front, back;
  front.mean = {0, 0, 1.0};
  front.log_scale = {-0.5, -0.5, -0.5};  // huge -> alpha clamped at 0.99 everywhere near axis
  front.opacity = 0.999999999;
  front.color = {1, 0, 0};
  back = front;
  back.mean = {0, 0, 3.0};
  back.color = {0, 1, 0};
  set.primitives.push_back(back);  // input order back-first: sorting must fix it
  set.primitives.push_back(front);

  const auto img = render::render(set, frontal_target(17));
  // at the center, transmittance after front is (1-0.99)^k with k tiny;
  // the back contribution must stay below ~1e-4 of full
  const double green = img.at(8, 8, 1);
  const double red = img.at(8, 8, 0);
  CHECK(red > 0.98);
  CHECK(green < 2e-2);

  // compositing alpha stays within [0, 1]: white-on-white never exceeds 1
  RenderTarget tw = frontal_target(17, {1, 1, 1});
  const auto img2 = render::render(set, tw);
  for (std::size_t i = 0; i < img2.size(); ++i) {
    CHECK(img2[i] <= 1.0 + 1e-12);
    CHECK(img2[i] >= -1e-12);
  }
}

TEST_CASE("rendering is invariant to input order") {
  Rng rng(9);
  gs::GaussianSet a;
  for (int i = 0; i < 12; ++i) a.primitives.push_back(random_gaussian(rng));
  gs::GaussianSet b = a;
  std::reverse(b.primitives.begin(), b.primitives.end());
  const auto target = frontal_target(24);
  const auto ia = render::render(a, target);
  const auto ib = render::render(b, target);
  for (std::size_t i = 0; i < ia.size(); ++i) CHECK(std::abs(ia[i] - ib[i]) <= 1e-12);
}

TEST_CASE("gaussians behind the camera are skipped, not an error") {
  gs::GaussianSet set;
  auto p = gs::GaussianPrimitive{};
  p.mean = {0, 0, -1.0};
  p.color = {1, 1, 1};
  p.opacity = 0.9;
  set.primitives.push_back(p);
  const auto img = render::render(set, frontal_target(8, {0.25, 0.25, 0.25}));
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(img[i] == doctest::Approx(0.25));
}

TEST_CASE("rigid rotation of camera and gaussians together leaves the image unchanged") {
  Rng rng(21);
  gs::GaussianSet set;
  for (int i = 0; i < 8; ++i) set.primitives.push_back(random_gaussian(rng));
  const auto target = frontal_target(24, {0.1, 0.2, 0.3});
  const auto base = render::render(set, target);

  const Vec3 ax{rng.normal(), rng.normal(), rng.normal()};
  const Quat q = Quat::from_axis_angle(ax.normalized(), 0.83);
  const Mat3 rot = q.to_matrix();

  gs::GaussianSet moved = set;
  for (auto& g : moved.primitives) {
    g.mean = rot * g.mean;
    g.rotation = (q * g.rotation).normalized();
  }
  RenderTarget moved_target = target;
  moved_target.pose.rotation = target.pose.rotation * rot.transposed();
  const auto img = render::render(moved, moved_target);
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(std::abs(img[i] - base[i]) < 1e-9);
}

TEST_CASE("render is deterministic across thread counts") {
  Rng rng(33);
  gs::GaussianSet set;
  for (int i = 0; i < 30; ++i) set.primitives.push_back(random_gaussian(rng));
  const auto target = frontal_target(48);
  std::vector<Image> runs;
  for (int threads : {1, 4, 8}) {
    set_thread_count(threads);
    runs.push_back(render::render(set, target));
  }
  set_thread_count(0);
  for (std::size_t r = 1; r < runs.size(); ++r)
    CHECK(runs[r].storage() == runs[0].storage());
}

TEST_CASE("zero image gradient gives zero parameter gradients") {
  Rng rng(40);
  gs::GaussianSet set;
  for (int i = 0; i < 5; ++i) set.primitives.push_back(random_gaussian(rng));
  const auto target = frontal_target(16);
  Image zero({16, 16, 3});
  const auto g = render::render_grad(set, target, zero, RasterConfig::gradcheck());
  for (std::size_t i = 0; i < set.size(); ++i) {
    CHECK(g.mean[i].norm() == 0.0);
    CHECK(g.log_scale[i].norm() == 0.0);
    CHECK(g.opacity[i] == 0.0);
    CHECK(g.color[i].norm() == 0.0);
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  const RasterConfig cfg = RasterConfig::gradcheck();
  const double h = 1e-5;
  double max_rel = 0.0;

  for (std::uint64_t scene = 0; scene < 6; ++scene) {
    Rng rng(500 + scene);
    gs::GaussianSet set;
    const int n = 2 + static_cast<int>(rng.uniform_index(5));
    for (int i = 0; i < n; ++i) set.primitives.push_back(random_gaussian(rng));
    const auto target = frontal_target(24, {rng.uniform(), rng.uniform(), rng.uniform()});
    Image weights({24, 24, 3});
    for (auto& v : weights.storage()) v = rng.uniform(-1, 1);

    const auto grads = render::render_grad(set, target, weights, cfg);

    auto fd = [&](auto setter) {
      gs::GaussianSet plus = set, minus = set;
      setter(plus, +h);
      setter(minus, -h);
      return (loss_of(render::render(plus, target, cfg), weights) -
              loss_of(render::render(minus, target, cfg), weights)) /
             (2 * h);
    };

    for (int i = 0; i < n; ++i) {
      for (int ax = 0; ax < 3; ++ax) {
        max_rel = std::max(
            max_rel, rel_err(grads.mean[i][ax], fd([&](gs::GaussianSet& s, double d) {
                       s.primitives[i].mean[ax] += d;
                     })));
        max_rel = std::max(
            max_rel, rel_err(grads.log_scale[i][ax], fd([&](gs::GaussianSet& s, double d) {
                       s.primitives[i].log_scale[ax] += d;
                     })));
        max_rel = std::max(
            max_rel, rel_err(grads.color[i][ax], fd([&](gs::GaussianSet& s, double d) {
                       s.primitives[i].color[ax] += d;
                     })));
      }
      max_rel = std::max(max_rel,
                         rel_err(grads.opacity[i], fd([&](gs::GaussianSet& s, double d) {
                                   s.primitives[i].opacity += d;
                                 })));
      const auto bump_quat = [&](int k) {
        return fd([&, k](gs::GaussianSet& s, double d) {
          auto& q = s.primitives[i].rotation;
          if (k == 0) q.w += d;
          if (k == 1) q.x += d;
          if (k == 2) q.y += d;
          if (k == 3) q.z += d;
        });
      };
      for (int k = 0; k < 4; ++k)
        max_rel = std::max(max_rel, rel_err(grads.rotation[i][k], bump_quat(k)));
    }
  }
  MESSAGE("max relative gradient error: ", max_rel);
  CHECK(max_rel < 1e-3);
}

TEST_CASE("render_grad is deterministic across thread counts") {
  Rng rng(71);
  gs::GaussianSet set;
  for (int i = 0; i < 12; ++i) set.primitives.push_back(random_gaussian(rng));
  const auto target = frontal_target(32);
  Image weights({32, 32, 3});
  for (auto& v : weights.storage()) v = rng.uniform(-1, 1);
  std::vector<render::RenderGrads> runs;
  for (int threads : {1, 4, 8}) {
    set_thread_count(threads);
    runs.push_back(render::render_grad(set, target, weights));
  }
  set_thread_count(0);
  for (std::size_t r = 1; r < runs.size(); ++r)
    for (std::size_t i = 0; i < set.size(); ++i) {
      CHECK(runs[r].mean[i].x == runs[0].mean[i].x);
      CHECK(runs[r].opacity[i] == runs[0].opacity[i]);
      CHECK(runs[r].rotation[i][2] == runs[0].rotation[i][2]);
    }
}

TEST_CASE("ssim identities") {
  Rng rng(50);
  Image a({16, 16, 3});
  for (auto& v : a.storage()) v = rng.uniform();
  CHECK(render::ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));

  Image b({16, 16, 3});
  for (auto& v : b.storage()) v = rng.uniform();
  CHECK(render::ssim(a, b) == doctest::Approx(render::ssim(b, a)).epsilon(1e-12));

  // constant images: zero variances -> (2 mu_a mu_b + C1)/(mu_a^2 + mu_b^2 + C1)
  Image ca({12, 12, 3});
  Image cb({12, 12, 3});
  for (auto& v : ca.storage()) v = 0.4;
  for (auto& v : cb.storage()) v = 0.5;
  const double c1 = 0.01 * 0.01;
  const double want = (2 * 0.4 * 0.5 + c1) / (0.4 * 0.4 + 0.5 * 0.5 + c1);
  CHECK(render::ssim(ca, cb) == doctest::Approx(want).epsilon(1e-12));

  Image small({4, 4, 3});
  CHECK_THROWS_AS(render::ssim(small, small), DomainError);
}

TEST_CASE("ssim gradient matches finite differences") {
  Rng rng(51);
  Image a({13, 13, 3}), b({13, 13, 3});
  for (auto& v : a.storage()) v = rng.uniform();
  for (auto& v : b.storage()) v = rng.uniform();
  Image grad;
  render::ssim_with_grad(a, b, &grad);
  const double h = 1e-6;
  for (int probe = 0; probe < 24; ++probe) {
    const std::size_t i = rng.uniform_index(a.size());
    Image ap = a, am = a;
    ap[i] += h;
    am[i] -= h;
    const double fd = (render::ssim(ap, b) - render::ssim(am, b)) / (2 * h);
    CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-4));
  }
}

TEST_CASE("canonical views: icosahedron and level-1 icosphere") {
  const auto dirs12 = render::sphere_directions(12);
  REQUIRE(dirs12.size() == 12);
  // pairwise minimum angular separation identical for every vertex
  std::vector<double> min_dots(12, -2.0);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) {
      if (i == j) continue;
      min_dots[i] = std::max(min_dots[i], dirs12[i].dot(dirs12[j]));
    }
  for (int i = 1; i < 12; ++i) CHECK(min_dots[i] == doctest::Approx(min_dots[0]).epsilon(1e-12));

  const auto dirs42 = render::sphere_directions(42);
  REQUIRE(dirs42.size() == 42);
  for (std::size_t i = 0; i < 42; ++i) {
    CHECK(dirs42[i].norm() == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t j = i + 1; j < 42; ++j)
      CHECK((dirs42[i] - dirs42[j]).norm() > 1e-6);  // distinct
  }
  // antipodal pairs present
  for (const auto& d : dirs42) {
    bool found = false;
    for (const auto& e : dirs42) found |= (d + e).norm() < 1e-9;
    CHECK(found);
  }

  const auto views = render::canonical_views(42, 64, 2.0);
  CHECK(views.size() == 42);
  for (const auto& pose : views.poses) {
    // optical axis passes through the cube center
    const Vec3 cam_center = pose.apply(views.center);
    CHECK(std::abs(cam_center.x) < 1e-9);
    CHECK(std::abs(cam_center.y) < 1e-9);
    CHECK(cam_center.z == doctest::Approx(2.0).epsilon(1e-12));
    // proper rotation
    CHECK(std::abs(pose.rotation.det() - 1.0) < 1e-12);
  }

  CHECK_THROWS_AS(render::canonical_views(3, 64), DomainError);
  CHECK(render::canonical_views(20, 32).size() == 20);  // Fibonacci fallback
}

TEST_CASE("css_loss is zero on identical renders and on empty-vs-white") {
  Rng rng(60);
  gs::GaussianSet set;
  set.frame = gs::Frame::Canonical;
  for (int i = 0; i < 6; ++i) {
    auto p = random_gaussian(rng);
    p.mean = {rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8)};
    set.primitives.push_back(p);
  }
  const auto views = render::canonical_views(12, 32);
  // ground truth = this very model's renders
  std::vector<Image> gt;
  for (const auto& pose : views.poses) {
    RenderTarget t;
    t.camera = views.camera;
    t.pose = pose;
    gt.push_back(render::render(set, t));
  }
  const auto rep = render::css_loss(set, gt, views, 0.2);
  CHECK(rep.total == doctest::Approx(0.0).epsilon(1e-12));
  for (double v : rep.ssim) CHECK(v == doctest::Approx(1.0));

  // empty set vs white GT of an empty scene
  std::vector<Image> white(views.size(), Image({32, 32, 3}));
  for (auto& img : white)
    for (auto& v : img.storage()) v = 1.0;
  const auto rep2 = render::css_loss({}, white, views, 0.2);
  CHECK(rep2.total == doctest::Approx(0.0));

  CHECK_THROWS_AS(render::css_loss(set, {}, views, 0.2), DomainError);
}

TEST_CASE("css_loss total composes l1 and ssim terms") {
  Rng rng(61);
  gs::GaussianSet set;
  set.frame = gs::Frame::Canonical;
  for (int i = 0; i < 4; ++i) {
    auto p = random_gaussian(rng);
    p.mean = {rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7)};
    set.primitives.push_back(p);
  }
  const auto views = render::canonical_views(12, 32);
  std::vector<Image> gt(views.size(), Image({32, 32, 3}));
  for (auto& img : gt)
    for (auto& v : img.storage()) v = rng.uniform();
  const double lam = 0.37;
  const auto rep = render::css_loss(set, gt, views, lam);
  double want = 0;
  for (std::size_t i = 0; i < views.size(); ++i)
    want += rep.l1[i] + lam * (1.0 - rep.ssim[i]);
  CHECK(rep.total == doctest::Approx(want).epsilon(1e-12));
  CHECK(rep.total >= 0.0);
}

TEST_CASE("css_fit: ground-truth init stays put; color-only error descends") {
  Rng rng(62);
  gs::GaussianSet set;
  set.frame = gs::Frame::Canonical;
  for (int i = 0; i < 5; ++i) {
    auto p = random_gaussian(rng);
    p.mean = {rng.uniform(0.25, 0.75), rng.uniform(0.25, 0.75), rng.uniform(0.25, 0.75)};
    p.log_scale = {-2.2, -2.2, -2.2};
    set.primitives.push_back(p);
  }
  const auto views = render::canonical_views(12, 32);
  std::vector<Image> gt;
  for (const auto& pose : views.poses) {
    RenderTarget t;
    t.camera = views.camera;
    t.pose = pose;
    gt.push_back(render::render(set, t));
  }

  render::FitConfig cfg;
  cfg.max_steps = 10;
  cfg.check_every = 1;
  const auto fixed = render::css_fit(set, gt, views, cfg);
  CHECK(fixed.loss_trace.front() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(fixed.loss_trace.back() <= 1e-6);

  // corrupt the colors and fit with a monotone schedule
  gs::GaussianSet bad = set;
  for (auto& p : bad.primitives) p.color = {rng.uniform(), rng.uniform(), rng.uniform()};
  render::FitConfig cfg2;
  cfg2.max_steps = 60;
  cfg2.monotone = true;
  cfg2.check_every = 5;
  const auto fit = render::css_fit(bad, gt, views, cfg2);
  CHECK(fit.loss_trace.back() < fit.loss_trace.front());
  for (std::size_t i = 1; i < fit.loss_trace.size(); ++i)
    CHECK(fit.loss_trace[i] <= fit.loss_trace[i - 1] + 1e-12);
  CHECK(fit.psnr_final > fit.psnr_init);
}

TEST_CASE("psnr basics") {
  Image a({8, 8, 3}), b({8, 8, 3});
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = 0.5;
    b[i] = 0.6;
  }
  CHECK(render::psnr(a, b) == doctest::Approx(20.0).epsilon(1e-9));  // mse 0.01
  CHECK(render::psnr(a, a) > 1e8);
}
