#pragma once

#include <vector>

#include "ocs/core/vec.hpp"

namespace ocs::eval3d {

/// Exact nearest-neighbor queries over a uniform grid (CSR cell layout).
/// Results match the brute-force scan bit-for-bit: both reduce with min over
/// identical per-point distances.
class PointGrid {
 public:
  explicit PointGrid(const std::vector<Vec3>& points);
  double min_dist_sq(const Vec3& q) const;
  std::size_t size() const { return n_; }

 private:
  std::size_t n_ = 0;
  int nx_ = 1, ny_ = 1, nz_ = 1;
  double cell_ = 1.0;
  Vec3 lo_, hi_;
  std::vector<std::size_t> cell_start_;  // nx*ny*nz + 1
  std::vector<double> xs_, ys_, zs_;     // points sorted by cell
};

/// Brute-force nearest squared distance (the reference path).
double min_dist_sq_brute(const std::vector<Vec3>& cloud, const Vec3& q);

/// mean_a min_b ||a-b|| + mean_b min_a ||b-a|| (unsquared L2, symmetric sum).
/// Throws DomainError on an empty cloud.
double chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

/// F1 = harmonic mean of precision (% of a within `threshold` of b) and recall,
/// as a percentage. Distances compared with strict <.
double fscore(const std::vector<Vec3>& a, const std::vector<Vec3>& b,
              double threshold = 0.1);

}  // namespace ocs::eval3d
