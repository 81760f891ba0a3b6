#pragma once

#include <utility>

#include "ocs/core/vec.hpp"

namespace ocs {

// Camera convention: +z forward, +x right, +y down, pixel (0,0) top-left,
// pixel centers at integer coordinates.
struct CameraIntrinsics {
  double f_w = 0.0;  // horizontal focal length, pixels
  double f_h = 0.0;  // vertical focal length, pixels
  double c_x = 0.0;  // principal point, pixels
  double c_y = 0.0;
  int width = 0;  // image size, pixels
  int height = 0;
};

/// f_w = W / (2 tan(theta_w/2)), f_h likewise; principal point at image center.
CameraIntrinsics intrinsics_from_fov(double theta_w, double theta_h, int width, int height);

/// Inverse of intrinsics_from_fov: (theta_w, theta_h) in radians.
std::pair<double, double> fov_from_intrinsics(const CameraIntrinsics& k);

/// p = d * K^-1 * (u, v, 1)^T. Throws DomainError for depth <= 0.
Vec3 backproject(double u, double v, double depth, const CameraIntrinsics& k);

/// Pinhole projection of a camera-frame point with z > 0 to pixel coordinates.
std::pair<double, double> project(const Vec3& p, const CameraIntrinsics& k);

}  // namespace ocs
