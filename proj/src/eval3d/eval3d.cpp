#include "ocs/eval3d/eval3d.hpp"

#include <algorithm>
#include <cmath>

#include "ocs/core/error.hpp"
#include "ocs/core/parallel.hpp"
#include "ocs/kernels/kernels.hpp"

namespace ocs::eval3d {

namespace {

constexpr std::size_t kBruteCutoff = 512;

struct SoA {
  std::vector<double> xs, ys, zs;
  explicit SoA(const std::vector<Vec3>& pts) {
    xs.reserve(pts.size());
    ys.reserve(pts.size());
    zs.reserve(pts.size());
    for (const auto& p : pts) {
      xs.push_back(p.x);
      ys.push_back(p.y);
      zs.push_back(p.z);
    }
  }
};

}  // namespace

double min_dist_sq_brute(const std::vector<Vec3>& cloud, const Vec3& q) {
  double best = 1e300;
  for (const auto& p : cloud) best = std::min(best, (p - q).squared_norm());
  return best;
}

PointGrid::PointGrid(const std::vector<Vec3>& points) : n_(points.size()) {
  if (points.empty()) throw DomainError("PointGrid: empty cloud");
  lo_ = hi_ = points[0];
  for (const auto& p : points) {
    lo_ = {std::min(lo_.x, p.x), std::min(lo_.y, p.y), std::min(lo_.z, p.z)};
    hi_ = {std::max(hi_.x, p.x), std::max(hi_.y, p.y), std::max(hi_.z, p.z)};
  }
  const Vec3 ext = hi_ - lo_;
  const double max_ext = std::max({ext.x, ext.y, ext.z, 1e-9});
  // ~32 cells along the longest axis keeps occupancy reasonable at our sizes.
  cell_ = max_ext / 32.0;
  nx_ = std::max(1, static_cast<int>(ext.x / cell_) + 1);
  ny_ = std::max(1, static_cast<int>(ext.y / cell_) + 1);
  nz_ = std::max(1, static_cast<int>(ext.z / cell_) + 1);

  const std::size_t ncells = static_cast<std::size_t>(nx_) * ny_ * nz_;
  auto cell_of = [&](const Vec3& p) {
    const int ix = std::min(nx_ - 1, static_cast<int>((p.x - lo_.x) / cell_));
    const int iy = std::min(ny_ - 1, static_cast<int>((p.y - lo_.y) / cell_));
    const int iz = std::min(nz_ - 1, static_cast<int>((p.z - lo_.z) / cell_));
    return (static_cast<std::size_t>(iz) * ny_ + iy) * nx_ + ix;
  };

  std::vector<std::size_t> counts(ncells + 1, 0);
  for (const auto& p : points) ++counts[cell_of(p) + 1];
  for (std::size_t i = 1; i <= ncells; ++i) counts[i] += counts[i - 1];
  cell_start_ = counts;

  xs_.resize(n_);
  ys_.resize(n_);
  zs_.resize(n_);
  std::vector<std::size_t> cursor(cell_start_.begin(), cell_start_.end() - 1);
  for (const auto& p : points) {
    const std::size_t c = cell_of(p);
    const std::size_t at = cursor[c]++;
    xs_[at] = p.x;
    ys_[at] = p.y;
    zs_[at] = p.z;
  }
}

double PointGrid::min_dist_sq(const Vec3& q) const {
  const auto& k = kern::kernels();
  const Vec3 qc{std::clamp(q.x, lo_.x, hi_.x), std::clamp(q.y, lo_.y, hi_.y),
                std::clamp(q.z, lo_.z, hi_.z)};
  const double base = (q - qc).norm();
  const int cx = std::min(nx_ - 1, static_cast<int>((qc.x - lo_.x) / cell_));
  const int cy = std::min(ny_ - 1, static_cast<int>((qc.y - lo_.y) / cell_));
  const int cz = std::min(nz_ - 1, static_cast<int>((qc.z - lo_.z) / cell_));

  double best = 1e300;
  const int max_r = std::max({nx_, ny_, nz_});
  for (int r = 0; r <= max_r; ++r) {
    // dist(q, ring-r cell) >= (r-1)*cell - |q - clamp(q)| by triangle inequality
    if (r >= 2) {
      const double bound = (r - 1) * cell_ - base;
      if (bound > 0 && bound * bound > best) break;
    }
    for (int iz = std::max(0, cz - r); iz <= std::min(nz_ - 1, cz + r); ++iz)
      for (int iy = std::max(0, cy - r); iy <= std::min(ny_ - 1, cy + r); ++iy)
        for (int ix = std::max(0, cx - r); ix <= std::min(nx_ - 1, cx + r); ++ix) {
          const int cheb =
              std::max({std::abs(ix - cx), std::abs(iy - cy), std::abs(iz - cz)});
          if (cheb != r) continue;
          // exact cell AABB distance
          const double ax = lo_.x + ix * cell_, bx = ax + cell_;
          const double ay = lo_.y + iy * cell_, by = ay + cell_;
          const double az = lo_.z + iz * cell_, bz = az + cell_;
          const double dx = q.x < ax ? ax - q.x : (q.x > bx ? q.x - bx : 0.0);
          const double dy = q.y < ay ? ay - q.y : (q.y > by ? q.y - by : 0.0);
          const double dz = q.z < az ? az - q.z : (q.z > bz ? q.z - bz : 0.0);
          if (dx * dx + dy * dy + dz * dz >= best) continue;
          const std::size_t c = (static_cast<std::size_t>(iz) * ny_ + iy) * nx_ + ix;
          const std::size_t s = cell_start_[c], e = cell_start_[c + 1];
          if (s == e) continue;
          const double d =
              k.min_dist_sq_f64(xs_.data() + s, ys_.data() + s, zs_.data() + s, e - s,
                                q.x, q.y, q.z);
          best = std::min(best, d);
        }
  }
  return best;
}

namespace {

/// Directed nearest distances from every a to b.
std::vector<double> nn_dists(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  std::vector<double> out(a.size());
  if (b.size() <= kBruteCutoff) {
    const SoA soa(b);
    const auto& k = kern::kernels();
    parallel_chunks(a.size(), 1024, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i)
        out[i] = std::sqrt(k.min_dist_sq_f64(soa.xs.data(), soa.ys.data(), soa.zs.data(),
                                             b.size(), a[i].x, a[i].y, a[i].z));
    });
  } else {
    const PointGrid grid(b);
    parallel_chunks(a.size(), 1024, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) out[i] = std::sqrt(grid.min_dist_sq(a[i]));
    });
  }
  return out;
}

}  // namespace

double chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  if (a.empty() || b.empty()) throw DomainError("chamfer: empty point cloud");
  const auto d_ab = nn_dists(a, b);
  const auto d_ba = nn_dists(b, a);
  const auto& k = kern::kernels();
  return k.sum_f64(d_ab.data(), d_ab.size()) / static_cast<double>(d_ab.size()) +
         k.sum_f64(d_ba.data(), d_ba.size()) / static_cast<double>(d_ba.size());
}

double fscore(const std::vector<Vec3>& a, const std::vector<Vec3>& b, double threshold) {
  if (a.empty() || b.empty()) throw DomainError("fscore: empty point cloud");
  if (!(threshold > 0)) throw DomainError("fscore: threshold must be positive");
  const auto d_ab = nn_dists(a, b);
  const auto d_ba = nn_dists(b, a);
  std::size_t na = 0, nb = 0;
  for (double d : d_ab) na += d < threshold;
  for (double d : d_ba) nb += d < threshold;
  const double precision = static_cast<double>(na) / static_cast<double>(a.size());
  const double recall = static_cast<double>(nb) / static_cast<double>(b.size());
  if (precision + recall <= 0.0) return 0.0;
  return 100.0 * 2.0 * precision * recall / (precision + recall);
}

}  // namespace ocs::eval3d
