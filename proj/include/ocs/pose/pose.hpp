#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ocs/core/camera.hpp"
#include "ocs/core/sim3.hpp"
#include "ocs/core/tensor.hpp"

namespace ocs::pose {

/// Paired canonical (unit-cube) and camera (meters) points.
struct CorrespondenceSet {
  std::vector<Vec3> canonical;
  std::vector<Vec3> camera;

  std::size_t size() const { return canonical.size(); }
};

/// Closed-form least-squares SIM(3): minimizes sum ||p_i - (s R c_i + t)||^2.
/// Throws DomainError for n < 3 or a collinear/degenerate canonical set.
Sim3 umeyama_sim3(const CorrespondenceSet& corr);

/// Mean squared alignment residual of `t` on `corr`.
double alignment_rms(const CorrespondenceSet& corr, const Sim3& t);

struct RansacConfig {
  double inlier_threshold = 0.01;  // meters
  int max_iterations = 2000;
  double confidence = 0.999;
  int min_inliers = 50;
  std::uint64_t seed = 0;
};

struct RansacResult {
  Sim3 pose;
  std::vector<std::uint32_t> inliers;  // indices into corr
};

/// Adaptive-iteration RANSAC over minimal 3-point samples, refit on the
/// consensus set. Returns nullopt when no hypothesis reaches min_inliers.
/// Deterministic for a given (corr, cfg): hypothesis RNG streams derive from
/// cfg.seed per iteration.
std::optional<RansacResult> ransac_sim3(const CorrespondenceSet& corr,
                                        const RansacConfig& cfg);

struct InstanceSplit {
  std::vector<std::uint32_t> pixels;  // linear pixel indices
  Sim3 pose;
  std::size_t inlier_count = 0;
};

struct SplitConfig {
  RansacConfig ransac;
  /// Pixels within assign_factor * inlier_threshold of an accepted model are
  /// claimed by that instance, so per-pixel noise does not shear one object
  /// into several.
  double assign_factor = 3.0;
};

/// Greedy multi-instance split of one semantic mask: repeat RANSAC on the
/// remaining pixels' NOCS<->3D correspondences, emit an instance while enough
/// inliers remain, remove claimed pixels. Returned pixel sets are disjoint.
std::vector<InstanceSplit> split_instances(const std::vector<std::uint32_t>& mask_pixels,
                                           const Tensor<float>& nocs,
                                           const Tensor<float>& depth,
                                           const CameraIntrinsics& k, const SplitConfig& cfg);

struct PoseEvalReport {
  double acc_10cm = 0, acc_10deg = 0, acc_joint = 0;  // percentages
  std::size_t pairs = 0;
};

struct PosePair {
  Sim3 pred;
  Sim3 gt;
};

/// Strict-inequality threshold accuracies: rotation geodesic angle < 10 deg,
/// translation L2 < 0.10 m, and both. Throws DomainError on empty input.
PoseEvalReport eval_pose(const std::vector<PosePair>& matched);

/// Geodesic rotation error in degrees and translation error in meters.
double rotation_error_deg(const Quat& a, const Quat& b);
double translation_error(const Vec3& a, const Vec3& b);

}  // namespace ocs::pose
