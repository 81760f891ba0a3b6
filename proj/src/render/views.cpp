#include "ocs/render/views.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ocs/core/error.hpp"

namespace ocs::render {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct IcoMesh {
  std::vector<Vec3> verts;
  std::vector<std::array<int, 3>> faces;
};

IcoMesh icosahedron() {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  IcoMesh m;
  const double v[12][3] = {{-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
                           {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
                           {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
  for (const auto& p : v) m.verts.push_back(Vec3{p[0], p[1], p[2]}.normalized());
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  return m;
}

IcoMesh subdivide(const IcoMesh& in) {
  IcoMesh out;
  out.verts = in.verts;
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const int idx = static_cast<int>(out.verts.size());
    out.verts.push_back(((in.verts[a] + in.verts[b]) * 0.5).normalized());
    midpoint.emplace(key, idx);
    return idx;
  };
  for (const auto& f : in.faces) {
    const int m01 = mid(f[0], f[1]), m12 = mid(f[1], f[2]), m20 = mid(f[2], f[0]);
    out.faces.push_back({f[0], m01, m20});
    out.faces.push_back({f[1], m12, m01});
    out.faces.push_back({f[2], m20, m12});
    out.faces.push_back({m01, m12, m20});
  }
  return out;
}

}  // namespace

std::vector<Vec3> sphere_directions(int n) {
  if (n < 4) throw DomainError("sphere_directions: need at least 4 views");
  // Icosphere counts: 12, 42, 162, 642, ... (10 * 4^k + 2)
  IcoMesh m = icosahedron();
  for (int level = 0; level < 6; ++level) {
    if (static_cast<int>(m.verts.size()) == n) return m.verts;
    if (static_cast<int>(m.verts.size()) > n) break;
    m = subdivide(m);
  }
  // Fibonacci spiral fallback for arbitrary counts.
  std::vector<Vec3> dirs;
  dirs.reserve(n);
  const double ga = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    dirs.push_back({r * std::cos(ga * i), r * std::sin(ga * i), z});
  }
  return dirs;
}

CameraPose look_at(const Vec3& position, const Vec3& at, const Vec3& up_hint) {
  const Vec3 fwd = (at - position).normalized();
  Vec3 up = up_hint;
  if (std::abs(fwd.dot(up.normalized())) > 0.999) up = {1, 0, 0};
  const Vec3 right = fwd.cross(up.normalized()).normalized();
  const Vec3 down = fwd.cross(right);  // +y is screen-down
  CameraPose p;
  p.rotation = Mat3::from_rows(right, down, fwd);
  p.translation = -(p.rotation * position);
  return p;
}

CanonicalViewSet canonical_views(int n, int resolution, double radius, double fov_rad) {
  if (resolution <= 0) throw DomainError("canonical_views: bad resolution");
  if (!(radius > 0)) throw DomainError("canonical_views: bad radius");
  CanonicalViewSet out;
  out.radius = radius;
  out.camera = intrinsics_from_fov(fov_rad, fov_rad, resolution, resolution);
  for (const Vec3& d : sphere_directions(n))
    out.poses.push_back(look_at(out.center + d * radius, out.center));
  return out;
}

}  // namespace ocs::render
