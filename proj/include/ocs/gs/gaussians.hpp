#pragma once

#include <cstdint>
#include <vector>

#include "ocs/core/camera.hpp"
#include "ocs/core/sim3.hpp"
#include "ocs/core/vec.hpp"

namespace ocs::gs {

enum class Frame : std::uint8_t { Camera, Canonical };

/// Anisotropic 3D Gaussian. Covariance is R(rotation) diag(exp(2 log_scale)) R^T.
struct GaussianPrimitive {
  Vec3 mean;                 // camera meters or canonical units, per set frame
  Vec3 log_scale;            // per-axis log standard deviation
  Quat rotation;             // unit quaternion
  double opacity = 0.5;      // in (0, 1); stored as logit in files
  Vec3 color;                // RGB in [0, 1]

  Mat3 covariance() const {
    const Mat3 r = rotation.to_matrix();
    const Vec3 v{std::exp(2.0 * log_scale.x), std::exp(2.0 * log_scale.y),
                 std::exp(2.0 * log_scale.z)};
    return r * Mat3::diag(v) * r.transposed();
  }

  bool finite() const {
    return mean.finite() && log_scale.finite() && rotation.finite() &&
           std::isfinite(opacity) && color.finite();
  }
};

struct GaussianSet {
  std::vector<GaussianPrimitive> primitives;
  Frame frame = Frame::Camera;
  /// Linear pixel index (v * W + u) each primitive was materialized from;
  /// empty when not pixel-derived.
  std::vector<std::uint32_t> source_pixel;

  std::size_t size() const { return primitives.size(); }
  bool empty() const { return primitives.empty(); }
};

/// inverse sigmoid; p must be strictly inside (0, 1)
double logit(double p);
double sigmoid(double x);

enum class CanonicalizeMode {
  MeansOnly,  // transform means by pose^-1, keep shape params as-is (default)
  FullSim3,   // additionally rotate orientations and divide scales by s
};

/// Builds one GaussianPrimitive per (pixel, slot) from a packed H x W x k x 14
/// parameter map: offset(3), log_scale(3), quat wxyz(4), opacity logit(1), rgb(3).
/// Means are backproject(u, v, depth) + offset in the camera frame.
GaussianSet materialize(const float* gauss_params, const float* depth, int width, int height,
                        int k, const std::vector<std::uint32_t>& pixels,
                        const CameraIntrinsics& cam);

/// Maps a camera-frame set into the canonical frame of `pose` (canonical->camera).
GaussianSet to_canonical(const GaussianSet& g, const Sim3& pose,
                         CanonicalizeMode mode = CanonicalizeMode::MeansOnly);

/// Generic frame map used by tests: applies `t` to every primitive the same way
/// to_canonical applies pose^-1.
GaussianSet apply_sim3(const GaussianSet& g, const Sim3& t, CanonicalizeMode mode,
                       Frame out_frame);

/// sum over offsets of max(0, |offset|_1 - tau).
double offset_regularizer(const std::vector<Vec3>& offsets, double tau_offset);

}  // namespace ocs::gs
