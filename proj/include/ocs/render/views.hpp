#pragma once

#include <vector>

#include "ocs/render/raster.hpp"

namespace ocs::render {

/// Cameras on a sphere about the canonical-cube center, all looking at the
/// center. Icosphere vertex counts (12, 42, 162, ...) give the subdivided
/// icosahedron; other counts fall back to a Fibonacci spiral.
struct CanonicalViewSet {
  std::vector<CameraPose> poses;  // world(=canonical) -> camera
  CameraIntrinsics camera;        // shared by all views
  Vec3 center{0.5, 0.5, 0.5};
  double radius = 2.0;

  std::size_t size() const { return poses.size(); }
};

CanonicalViewSet canonical_views(int n = 42, int resolution = 512, double radius = 2.0,
                                 double fov_rad = 40.0 * 3.14159265358979323846 / 180.0);

/// Unit directions used by canonical_views (exposed for tests).
std::vector<Vec3> sphere_directions(int n);

/// Camera at `position` looking at `at`: +z toward the target, +y screen-down.
/// up_hint breaks the roll ambiguity (default world +z; +x when degenerate).
CameraPose look_at(const Vec3& position, const Vec3& at, const Vec3& up_hint = {0, 0, 1});

}  // namespace ocs::render
