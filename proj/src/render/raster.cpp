#include "ocs/render/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "ocs/core/error.hpp"
#include "ocs/core/parallel.hpp"
#include "ocs/kernels/kernels.hpp"

namespace ocs::render {

namespace {

struct Splat {
  std::uint32_t index = 0;  // into the input set
  double z = 0;
  double u = 0, v = 0;   // projected center
  double a = 0, b = 0, c = 0;  // 2D covariance entries (after lowpass)
  double det = 0;
  double opacity = 0;
  Vec3 color;
  int x0 = 0, x1 = -1, y0 = 0, y1 = -1;  // inclusive pixel bbox
  // cached for the backward chain
  Vec3 mean_cam;
  Quat q_unit;
  Mat3 cov_cam;  // W Sigma_world W^T
};

struct Frame {
  std::vector<Splat> splats;  // depth sorted
  std::size_t h = 0, w = 0;
};

Frame prepare(const gs::GaussianSet& g, const RenderTarget& target,
              const RasterConfig& cfg) {
  Frame fr;
  fr.h = static_cast<std::size_t>(target.camera.height);
  fr.w = static_cast<std::size_t>(target.camera.width);
  const Mat3& wr = target.pose.rotation;
  const double fw = target.camera.f_w, fh = target.camera.f_h;

  fr.splats.reserve(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto& p = g.primitives[i];
    if (!p.finite()) throw DomainError("render: non-finite Gaussian parameter");
    Splat s;
    s.index = static_cast<std::uint32_t>(i);
    s.mean_cam = target.pose.apply(p.mean);
    if (!(s.mean_cam.z > cfg.z_near)) continue;  // behind camera: skipped, not an error
    s.z = s.mean_cam.z;
    s.u = fw * s.mean_cam.x / s.mean_cam.z + target.camera.c_x;
    s.v = fh * s.mean_cam.y / s.mean_cam.z + target.camera.c_y;

    s.q_unit = p.rotation.normalized();
    const Mat3 rot = s.q_unit.to_matrix();
    const Vec3 var{std::exp(2.0 * p.log_scale.x), std::exp(2.0 * p.log_scale.y),
                   std::exp(2.0 * p.log_scale.z)};
    const Mat3 cov_world = rot * Mat3::diag(var) * rot.transposed();
    s.cov_cam = wr * cov_world * wr.transposed();

    const double x = s.mean_cam.x, y = s.mean_cam.y, z = s.mean_cam.z;
    // J rows: du/d(mean_cam), dv/d(mean_cam)
    const Vec3 j0{fw / z, 0.0, -fw * x / (z * z)};
    const Vec3 j1{0.0, fh / z, -fh * y / (z * z)};
    s.a = j0.dot(s.cov_cam * j0) + cfg.lowpass;
    s.b = j0.dot(s.cov_cam * j1);
    s.c = j1.dot(s.cov_cam * j1) + cfg.lowpass;
    s.det = s.a * s.c - s.b * s.b;
    if (!(s.det > 0)) continue;  // cannot happen after lowpass unless degenerate input

    const double mid = 0.5 * (s.a + s.c);
    const double lam_max = mid + std::sqrt(std::max(0.0, mid * mid - s.det));
    const double radius = cfg.cutoff_sigma * std::sqrt(lam_max);
    s.x0 = std::max(0, static_cast<int>(std::ceil(s.u - radius)));
    s.x1 = std::min(static_cast<int>(fr.w) - 1, static_cast<int>(std::floor(s.u + radius)));
    s.y0 = std::max(0, static_cast<int>(std::ceil(s.v - radius)));
    s.y1 = std::min(static_cast<int>(fr.h) - 1, static_cast<int>(std::floor(s.v + radius)));
    if (s.x0 > s.x1 || s.y0 > s.y1) continue;

    s.opacity = p.opacity;
    s.color = p.color;
    fr.splats.push_back(s);
  }
  std::stable_sort(fr.splats.begin(), fr.splats.end(), [](const Splat& l, const Splat& r) {
    return l.z < r.z || (l.z == r.z && l.index < r.index);
  });
  return fr;
}

constexpr std::size_t kBandRows = 8;

/// alpha of splat s at pixel (px, py); negative return = skip.
inline double splat_alpha(const Splat& s, double px, double py, const RasterConfig& cfg) {
  const double dx = px - s.u;
  const double dy = py - s.v;
  const double qf = s.c * dx * dx - 2.0 * s.b * dx * dy + s.a * dy * dy;
  const double power = -0.5 * qf / s.det;
  if (power < -0.5 * cfg.cutoff_sigma * cfg.cutoff_sigma) return -1.0;
  double alpha = s.opacity * std::exp(power);
  if (alpha < cfg.alpha_min) return -1.0;
  if (alpha > cfg.alpha_max) alpha = cfg.alpha_max;
  return alpha;
}

void forward_pass(const Frame& fr, const RenderTarget& target, const RasterConfig& cfg,
                  Image* image, std::vector<double>* t_final,
                  std::vector<std::int32_t>* last_rank) {
  const std::size_t h = fr.h, w = fr.w;
  std::vector<double> color_acc(h * w * 3, 0.0);
  std::vector<double> trans(h * w, 1.0);
  std::vector<std::int32_t> last(h * w, -1);

  const std::size_t bands = (h + kBandRows - 1) / kBandRows;
  parallel_chunks(bands, 1, [&](std::size_t band, std::size_t) {
    const int by0 = static_cast<int>(band * kBandRows);
    const int by1 = std::min<int>(static_cast<int>(h) - 1, by0 + kBandRows - 1);
    for (std::size_t r = 0; r < fr.splats.size(); ++r) {
      const Splat& s = fr.splats[r];
      const int y0 = std::max(s.y0, by0), y1 = std::min(s.y1, by1);
      for (int y = y0; y <= y1; ++y)
        for (int x = s.x0; x <= s.x1; ++x) {
          const std::size_t p = static_cast<std::size_t>(y) * w + x;
          double& t = trans[p];
          if (t < cfg.t_min) continue;
          const double alpha = splat_alpha(s, x, y, cfg);
          if (alpha < 0) continue;
          const double wgt = alpha * t;
          color_acc[3 * p + 0] += s.color.x * wgt;
          color_acc[3 * p + 1] += s.color.y * wgt;
          color_acc[3 * p + 2] += s.color.z * wgt;
          t *= 1.0 - alpha;
          last[p] = static_cast<std::int32_t>(r);
        }
    }
  });

  if (image) {
    *image = Image({h, w, 3});
    for (std::size_t p = 0; p < h * w; ++p) {
      (*image)[3 * p + 0] = color_acc[3 * p + 0] + target.background.x * trans[p];
      (*image)[3 * p + 1] = color_acc[3 * p + 1] + target.background.y * trans[p];
      (*image)[3 * p + 2] = color_acc[3 * p + 2] + target.background.z * trans[p];
    }
  }
  if (t_final) *t_final = std::move(trans);
  if (last_rank) *last_rank = std::move(last);
}

/// Per-splat screen-space gradient accumulators.
struct SplatGrad {
  double du = 0, dv = 0, da = 0, db = 0, dc = 0, dopacity = 0;
  Vec3 dcolor;
};

// d(R)/dq for a unit quaternion, contracted with G: sum_ij G_ij dR_ij/dq_k.
std::array<double, 4> rotation_grad(const Quat& q, const Mat3& g) {
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  std::array<double, 4> out{};
  // dR/dw
  out[0] = 2.0 * (g(0, 1) * -z + g(0, 2) * y + g(1, 0) * z + g(1, 2) * -x +
                  g(2, 0) * -y + g(2, 1) * x);
  // dR/dx
  out[1] = 2.0 * (g(0, 1) * y + g(0, 2) * z + g(1, 0) * y + g(1, 1) * -2.0 * x +
                  g(1, 2) * -w + g(2, 0) * z + g(2, 1) * w + g(2, 2) * -2.0 * x);
  // dR/dy
  out[2] = 2.0 * (g(0, 0) * -2.0 * y + g(0, 1) * x + g(0, 2) * w + g(1, 0) * x +
                  g(1, 2) * z + g(2, 0) * -w + g(2, 1) * z + g(2, 2) * -2.0 * y);
  // dR/dz
  out[3] = 2.0 * (g(0, 0) * -2.0 * z + g(0, 1) * -w + g(0, 2) * x + g(1, 0) * w +
                  g(1, 1) * -2.0 * z + g(1, 2) * y + g(2, 0) * x + g(2, 1) * y);
  return out;
}

}  // namespace

void RenderGrads::add(const RenderGrads& o) {
  for (std::size_t i = 0; i < mean.size(); ++i) {
    mean[i] += o.mean[i];
    log_scale[i] += o.log_scale[i];
    for (int k = 0; k < 4; ++k) rotation[i][k] += o.rotation[i][k];
    opacity[i] += o.opacity[i];
    color[i] += o.color[i];
  }
}

Image render(const gs::GaussianSet& g, const RenderTarget& target, const RasterConfig& cfg) {
  const Frame fr = prepare(g, target, cfg);
  Image img;
  forward_pass(fr, target, cfg, &img, nullptr, nullptr);
  return img;
}

namespace {

RenderGrads render_grad_impl(
    const gs::GaussianSet& g, const RenderTarget& target, const Image* fixed_grad,
    const std::function<void(const Image&, Image*)>& make_pixel_grad,
    const RasterConfig& cfg, Image* forward_out) {
  const Frame fr = prepare(g, target, cfg);
  const std::size_t h = fr.h, w = fr.w;
  if (fixed_grad &&
      (fixed_grad->rank() != 3 || fixed_grad->dim(0) != h || fixed_grad->dim(1) != w ||
       fixed_grad->dim(2) != 3))
    throw DomainError("render_grad: image_grad shape mismatch");

  std::vector<double> t_final;
  std::vector<std::int32_t> last_rank;
  Image forward;
  forward_pass(fr, target, cfg, &forward, &t_final, &last_rank);

  Image computed_grad;
  if (!fixed_grad) {
    make_pixel_grad(forward, &computed_grad);
    if (computed_grad.rank() != 3 || computed_grad.dim(0) != h ||
        computed_grad.dim(1) != w || computed_grad.dim(2) != 3)
      throw DomainError("render_grad: pixel_grad shape mismatch");
  }
  const Image& image_grad = fixed_grad ? *fixed_grad : computed_grad;
  if (forward_out) *forward_out = std::move(forward);

  const std::size_t nsplat = fr.splats.size();
  const std::size_t bands = (h + kBandRows - 1) / kBandRows;
  std::vector<std::vector<SplatGrad>> band_grads(bands);

  parallel_chunks(bands, 1, [&](std::size_t band, std::size_t) {
    auto& grads = band_grads[band];
    grads.assign(nsplat, SplatGrad{});
    const int by0 = static_cast<int>(band * kBandRows);
    const int by1 = std::min<int>(static_cast<int>(h) - 1, by0 + kBandRows - 1);

    // Per-pixel running state for the reverse sweep.
    const std::size_t rows = static_cast<std::size_t>(by1 - by0 + 1);
    std::vector<double> t_cur(rows * w);
    std::vector<double> suffix(rows * w * 3);
    for (std::size_t ry = 0; ry < rows; ++ry)
      for (std::size_t x = 0; x < w; ++x) {
        const std::size_t p = (by0 + ry) * w + x;
        const std::size_t lp = ry * w + x;
        t_cur[lp] = t_final[p];
        suffix[3 * lp + 0] = target.background.x * t_final[p];
        suffix[3 * lp + 1] = target.background.y * t_final[p];
        suffix[3 * lp + 2] = target.background.z * t_final[p];
      }

    for (std::size_t rr = nsplat; rr-- > 0;) {
      const Splat& s = fr.splats[rr];
      SplatGrad& sg = grads[rr];
      const int y0 = std::max(s.y0, by0), y1 = std::min(s.y1, by1);
      for (int y = y0; y <= y1; ++y)
        for (int x = s.x0; x <= s.x1; ++x) {
          const std::size_t p = static_cast<std::size_t>(y) * w + x;
          if (last_rank[p] < static_cast<std::int32_t>(rr)) continue;
          const std::size_t lp = static_cast<std::size_t>(y - by0) * w + x;

          const double dx = x - s.u;
          const double dy = y - s.v;
          const double qf = s.c * dx * dx - 2.0 * s.b * dx * dy + s.a * dy * dy;
          const double power = -0.5 * qf / s.det;
          if (power < -0.5 * cfg.cutoff_sigma * cfg.cutoff_sigma) continue;
          double alpha = s.opacity * std::exp(power);
          if (alpha < cfg.alpha_min) continue;
          const bool clamped = alpha > cfg.alpha_max;
          if (clamped) alpha = cfg.alpha_max;

          const double t_before = t_cur[lp] / (1.0 - alpha);
          const double wgt = alpha * t_before;
          const double gpx[3] = {image_grad[3 * p + 0], image_grad[3 * p + 1],
                                 image_grad[3 * p + 2]};

          sg.dcolor.x += gpx[0] * wgt;
          sg.dcolor.y += gpx[1] * wgt;
          sg.dcolor.z += gpx[2] * wgt;

          // dC/dalpha = color * T_before - suffix / (1 - alpha)
          const double inv1ma = 1.0 / (1.0 - alpha);
          double dalpha = gpx[0] * (s.color.x * t_before - suffix[3 * lp + 0] * inv1ma) +
                          gpx[1] * (s.color.y * t_before - suffix[3 * lp + 1] * inv1ma) +
                          gpx[2] * (s.color.z * t_before - suffix[3 * lp + 2] * inv1ma);

          suffix[3 * lp + 0] += s.color.x * wgt;
          suffix[3 * lp + 1] += s.color.y * wgt;
          suffix[3 * lp + 2] += s.color.z * wgt;
          t_cur[lp] = t_before;

          if (clamped) continue;  // clamp has zero local derivative
          sg.dopacity += dalpha * std::exp(power);
          const double dpower = dalpha * alpha;

          // power = -(c dx^2 - 2 b dx dy + a dy^2) / (2 det), det = ac - b^2
          const double inv_det = 1.0 / s.det;
          const double ddx = -(s.c * dx - s.b * dy) * inv_det;  // dpower/ddx
          const double ddy = -(s.a * dy - s.b * dx) * inv_det;
          sg.du -= dpower * ddx;  // dx = x - u
          sg.dv -= dpower * ddy;
          const double det2 = inv_det * inv_det;
          sg.da += dpower * (-0.5) * (dy * dy * s.det - qf * s.c) * det2;
          sg.db += dpower * (dx * dy * s.det - qf * s.b) * det2;
          sg.dc += dpower * (-0.5) * (dx * dx * s.det - qf * s.a) * det2;
        }
    }
  });

  // Merge per-band accumulators in band order, then chain to 3D parameters.
  std::vector<SplatGrad> total(nsplat);
  for (std::size_t band = 0; band < bands; ++band)
    for (std::size_t i = 0; i < nsplat; ++i) {
      const SplatGrad& a = band_grads[band][i];
      SplatGrad& t = total[i];
      t.du += a.du;
      t.dv += a.dv;
      t.da += a.da;
      t.db += a.db;
      t.dc += a.dc;
      t.dopacity += a.dopacity;
      t.dcolor += a.dcolor;
    }

  RenderGrads out;
  out.resize(g.size());
  const Mat3& wr = target.pose.rotation;
  const double fw = target.camera.f_w, fh = target.camera.f_h;

  for (std::size_t r = 0; r < nsplat; ++r) {
    const Splat& s = fr.splats[r];
    const SplatGrad& sg = total[r];
    const std::size_t gi = s.index;
    const auto& prim = g.primitives[gi];

    out.opacity[gi] += sg.dopacity;
    out.color[gi] += sg.dcolor;

    const double x = s.mean_cam.x, y = s.mean_cam.y, z = s.mean_cam.z;
    const double iz = 1.0 / z;
    const Vec3 j0{fw * iz, 0.0, -fw * x * iz * iz};
    const Vec3 j1{0.0, fh * iz, -fh * y * iz * iz};

    // mean gradient through the projected center
    Vec3 g_mc = j0 * sg.du + j1 * sg.dv;

    // 2D covariance gradient as a symmetric matrix
    const double g2[2][2] = {{sg.da, 0.5 * sg.db}, {0.5 * sg.db, sg.dc}};

    // dSigma_cam = J^T G2 J
    Mat3 d_cov_cam = Mat3::zero();
    const Vec3 jr[2] = {j0, j1};
    for (int a2 = 0; a2 < 2; ++a2)
      for (int b2 = 0; b2 < 2; ++b2) {
        const double gv = g2[a2][b2];
        if (gv == 0.0) continue;
        for (int m = 0; m < 3; ++m)
          for (int n2 = 0; n2 < 3; ++n2) d_cov_cam(m, n2) += gv * jr[a2][m] * jr[b2][n2];
      }

    // dJ = 2 G2 J Sigma_cam, then through J's dependence on mean_cam.
    double dj[2][3] = {{0, 0, 0}, {0, 0, 0}};
    for (int a2 = 0; a2 < 2; ++a2)
      for (int n2 = 0; n2 < 3; ++n2) {
        double acc = 0.0;
        for (int b2 = 0; b2 < 2; ++b2) {
          const Vec3 js = s.cov_cam * jr[b2];
          acc += 2.0 * g2[a2][b2] * js[n2];
        }
        dj[a2][n2] = acc;
      }
    g_mc.x += dj[0][2] * (-fw * iz * iz);
    g_mc.y += dj[1][2] * (-fh * iz * iz);
    g_mc.z += dj[0][0] * (-fw * iz * iz) + dj[0][2] * (2.0 * fw * x * iz * iz * iz) +
              dj[1][1] * (-fh * iz * iz) + dj[1][2] * (2.0 * fh * y * iz * iz * iz);

    out.mean[gi] += wr.transposed() * g_mc;

    // dSigma_world = W^T dSigma_cam W
    const Mat3 d_cov_world = wr.transposed() * d_cov_cam * wr;

    const Mat3 rot = s.q_unit.to_matrix();
    const Vec3 var{std::exp(2.0 * prim.log_scale.x), std::exp(2.0 * prim.log_scale.y),
                   std::exp(2.0 * prim.log_scale.z)};

    // Sigma_world = R diag(var) R^T
    const Mat3 d_rot = (d_cov_world + d_cov_world.transposed()) * rot * Mat3::diag(var);
    const Mat3 rt_d_r = rot.transposed() * d_cov_world * rot;
    out.log_scale[gi].x += rt_d_r(0, 0) * 2.0 * var.x;
    out.log_scale[gi].y += rt_d_r(1, 1) * 2.0 * var.y;
    out.log_scale[gi].z += rt_d_r(2, 2) * 2.0 * var.z;

    // Through the internal normalization q_unit = q / |q| (|q| treated at the
    // stored value, which is already unit).
    const std::array<double, 4> gq_unit = rotation_grad(s.q_unit, d_rot);
    const double qdot = gq_unit[0] * s.q_unit.w + gq_unit[1] * s.q_unit.x +
                        gq_unit[2] * s.q_unit.y + gq_unit[3] * s.q_unit.z;
    const double qn = prim.rotation.norm();
    const double qv[4] = {s.q_unit.w, s.q_unit.x, s.q_unit.y, s.q_unit.z};
    for (int k2 = 0; k2 < 4; ++k2)
      out.rotation[gi][k2] += (gq_unit[k2] - qdot * qv[k2]) / qn;
  }
  return out;
}

}  // namespace

RenderGrads render_grad(const gs::GaussianSet& g, const RenderTarget& target,
                        const Image& image_grad, const RasterConfig& cfg,
                        Image* forward_out) {
  return render_grad_impl(g, target, &image_grad, nullptr, cfg, forward_out);
}

RenderGrads render_grad_fused(
    const gs::GaussianSet& g, const RenderTarget& target,
    const std::function<void(const Image&, Image*)>& make_pixel_grad,
    const RasterConfig& cfg) {
  return render_grad_impl(g, target, nullptr, make_pixel_grad, cfg, nullptr);
}

double psnr(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw DomainError("psnr: shape mismatch");
  const double mse =
      kern::kernels().sum_sq_diff_f64(a.data(), b.data(), a.size()) /
      static_cast<double>(a.size());
  if (mse <= 0.0) return 1e9;
  return 10.0 * std::log10(1.0 / mse);
}

double psnr_multi(const std::vector<Image>& a, const std::vector<Image>& b) {
  if (a.size() != b.size()) throw DomainError("psnr_multi: view count mismatch");
  double sq = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sq += kern::kernels().sum_sq_diff_f64(a[i].data(), b[i].data(), a[i].size());
    n += a[i].size();
  }
  const double mse = sq / static_cast<double>(n);
  if (mse <= 0.0) return 1e9;
  return 10.0 * std::log10(1.0 / mse);
}

}  // namespace ocs::render
