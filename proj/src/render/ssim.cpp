#include "ocs/render/ssim.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "ocs/core/error.hpp"

namespace ocs::render {

namespace {

constexpr int kWin = 11;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

const std::array<double, kWin>& kernel1d() {
  static const auto k = [] {
    std::array<double, kWin> out{};
    const double sigma = 1.5;
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i) {
      const double d = i - kWin / 2;
      out[i] = std::exp(-d * d / (2.0 * sigma * sigma));
      sum += out[i];
    }
    for (auto& v : out) v /= sum;
    return out;
  }();
  return k;
}

// Valid-mode separable correlation of one channel: in is h x w, out is
// (h-10) x (w-10) at stride w (top-left aligned).
void conv_valid(const double* in, std::size_t h, std::size_t w, double* tmp, double* out) {
  const auto& k = kernel1d();
  const std::size_t ow = w - kWin + 1, oh = h - kWin + 1;
  // horizontal pass into tmp (h x ow)
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0;
      for (int i = 0; i < kWin; ++i) acc += k[i] * in[y * w + x + i];
      tmp[y * ow + x] = acc;
    }
  // vertical pass into out (oh x ow)
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0;
      for (int i = 0; i < kWin; ++i) acc += k[i] * tmp[(y + i) * ow + x];
      out[y * ow + x] = acc;
    }
}

// Adjoint of conv_valid: spreads a (h-10) x (w-10) field back onto h x w.
void conv_spread(const double* in, std::size_t h, std::size_t w, double* tmp, double* out) {
  const auto& k = kernel1d();
  const std::size_t ow = w - kWin + 1, oh = h - kWin + 1;
  // vertical adjoint into tmp (h x ow)
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0;
      const int lo = std::max<int>(0, static_cast<int>(y) - static_cast<int>(oh) + 1);
      const int hi = std::min<int>(kWin - 1, static_cast<int>(y));
      for (int i = lo; i <= hi; ++i) acc += k[i] * in[(y - i) * ow + x];
      tmp[y * ow + x] = acc;
    }
  // horizontal adjoint into out (h x w)
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      double acc = 0;
      const int lo = std::max<int>(0, static_cast<int>(x) - static_cast<int>(ow) + 1);
      const int hi = std::min<int>(kWin - 1, static_cast<int>(x));
      for (int i = lo; i <= hi; ++i) acc += k[i] * tmp[y * ow + x - i];
      out[y * w + x] = acc;
    }
}

double ssim_impl(const Image& a, const Image& b, Image* grad_a) {
  if (!a.same_shape(b)) throw DomainError("ssim: shape mismatch");
  const std::size_t h = a.dim(0), w = a.dim(1);
  if (h < kWin || w < kWin) throw DomainError("ssim: image smaller than the 11x11 window");
  if (grad_a) *grad_a = Image({h, w, 3});

  const std::size_t oh = h - kWin + 1, ow = w - kWin + 1;
  const double n_windows = static_cast<double>(oh * ow * 3);
  double total = 0.0;

  std::vector<double> ca(h * w), cb(h * w), buf(h * w);
  std::vector<double> tmp(h * std::max(w, ow));
  std::vector<double> mu_a(oh * ow), mu_b(oh * ow), saa(oh * ow), sbb(oh * ow),
      sab(oh * ow);
  std::vector<double> d_mu(oh * ow), d_var(oh * ow), d_cov(oh * ow), d_vma(oh * ow),
      d_cmb(oh * ow), spread(h * w);

  for (std::size_t ch = 0; ch < 3; ++ch) {
    for (std::size_t p = 0; p < h * w; ++p) {
      ca[p] = a[3 * p + ch];
      cb[p] = b[3 * p + ch];
    }
    conv_valid(ca.data(), h, w, tmp.data(), mu_a.data());
    conv_valid(cb.data(), h, w, tmp.data(), mu_b.data());
    for (std::size_t p = 0; p < h * w; ++p) buf[p] = ca[p] * ca[p];
    conv_valid(buf.data(), h, w, tmp.data(), saa.data());
    for (std::size_t p = 0; p < h * w; ++p) buf[p] = cb[p] * cb[p];
    conv_valid(buf.data(), h, w, tmp.data(), sbb.data());
    for (std::size_t p = 0; p < h * w; ++p) buf[p] = ca[p] * cb[p];
    conv_valid(buf.data(), h, w, tmp.data(), sab.data());

    for (std::size_t i = 0; i < oh * ow; ++i) {
      const double va = saa[i] - mu_a[i] * mu_a[i];
      const double vb = sbb[i] - mu_b[i] * mu_b[i];
      const double cov = sab[i] - mu_a[i] * mu_b[i];
      const double n1 = 2.0 * mu_a[i] * mu_b[i] + kC1;
      const double d1 = mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + kC1;
      const double n2 = 2.0 * cov + kC2;
      const double d2 = va + vb + kC2;
      const double l = n1 / d1;
      const double s = n2 / d2;
      total += l * s;
      if (grad_a) {
        d_mu[i] = s * (2.0 * mu_b[i] * d1 - 2.0 * mu_a[i] * n1) / (d1 * d1);
        d_var[i] = -l * n2 / (d2 * d2);
        d_cov[i] = l * 2.0 / d2;
        d_vma[i] = d_var[i] * mu_a[i];
        d_cmb[i] = d_cov[i] * mu_b[i];
      }
    }

    if (grad_a) {
      // dSSIM/da_p = spread(d_mu) + 2 a_p spread(d_var) - 2 spread(d_var mu_a)
      //            + b_p spread(d_cov) - spread(d_cov mu_b), averaged over windows
      conv_spread(d_mu.data(), h, w, tmp.data(), spread.data());
      for (std::size_t p = 0; p < h * w; ++p)
        grad_a->operator[](3 * p + ch) = spread[p];
      conv_spread(d_var.data(), h, w, tmp.data(), spread.data());
      for (std::size_t p = 0; p < h * w; ++p)
        grad_a->operator[](3 * p + ch) += 2.0 * ca[p] * spread[p];
      conv_spread(d_vma.data(), h, w, tmp.data(), spread.data());
      for (std::size_t p = 0; p < h * w; ++p)
        grad_a->operator[](3 * p + ch) -= 2.0 * spread[p];
      conv_spread(d_cov.data(), h, w, tmp.data(), spread.data());
      for (std::size_t p = 0; p < h * w; ++p)
        grad_a->operator[](3 * p + ch) += cb[p] * spread[p];
      conv_spread(d_cmb.data(), h, w, tmp.data(), spread.data());
      for (std::size_t p = 0; p < h * w; ++p)
        grad_a->operator[](3 * p + ch) -= spread[p];
      for (std::size_t p = 0; p < h * w; ++p)
        grad_a->operator[](3 * p + ch) /= n_windows;
    }
  }
  return total / n_windows;
}

}  // namespace

double ssim(const Image& a, const Image& b) { return ssim_impl(a, b, nullptr); }

double ssim_with_grad(const Image& a, const Image& b, Image* grad_a) {
  return ssim_impl(a, b, grad_a);
}

}  // namespace ocs::render
