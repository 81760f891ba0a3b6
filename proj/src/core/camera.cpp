#include "ocs/core/camera.hpp"

#include <cmath>

#include "ocs/core/error.hpp"

namespace ocs {

CameraIntrinsics intrinsics_from_fov(double theta_w, double theta_h, int width, int height) {
  if (!std::isfinite(theta_w) || !std::isfinite(theta_h) || theta_w <= 0 ||
      theta_h <= 0 || theta_w >= 3.14159265358979323846 || theta_h >= 3.14159265358979323846)
    throw DomainError("intrinsics_from_fov: field-of-view angle out of (0, pi)");
  if (width <= 0 || height <= 0)
    throw DomainError("intrinsics_from_fov: nonpositive image size");
  CameraIntrinsics k;
  k.f_w = width / (2.0 * std::tan(theta_w / 2.0));
  k.f_h = height / (2.0 * std::tan(theta_h / 2.0));
  k.c_x = width / 2.0;
  k.c_y = height / 2.0;
  k.width = width;
  k.height = height;
  return k;
}

std::pair<double, double> fov_from_intrinsics(const CameraIntrinsics& k) {
  if (k.f_w <= 0 || k.f_h <= 0) throw DomainError("fov_from_intrinsics: nonpositive focal");
  return {2.0 * std::atan2(k.width / 2.0, k.f_w), 2.0 * std::atan2(k.height / 2.0, k.f_h)};
}

Vec3 backproject(double u, double v, double depth, const CameraIntrinsics& k) {
  if (!(depth > 0) || !std::isfinite(depth))
    throw DomainError("backproject: depth must be positive and finite");
  return {depth * (u - k.c_x) / k.f_w, depth * (v - k.c_y) / k.f_h, depth};
}

std::pair<double, double> project(const Vec3& p, const CameraIntrinsics& k) {
  if (!(p.z > 0)) throw DomainError("project: point behind camera");
  return {k.f_w * p.x / p.z + k.c_x, k.f_h * p.y / p.z + k.c_y};
}

}  // namespace ocs
