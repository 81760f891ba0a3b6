#pragma once

#include "ocs/core/vec.hpp"

namespace ocs {

/// Similarity transform x -> scale * R(rotation) * x + translation.
struct Sim3 {
  double scale = 1.0;
  Quat rotation;  // unit quaternion
  Vec3 translation;

  static Sim3 identity() { return {}; }

  Vec3 apply(const Vec3& x) const { return rotation.rotate(x) * scale + translation; }

  /// x -> s^-1 * R^T * (x - t), returned as another Sim3.
  Sim3 inverse() const {
    Sim3 inv;
    inv.scale = 1.0 / scale;
    inv.rotation = rotation.conjugate().canonical();
    inv.translation = inv.rotation.rotate(translation) * (-inv.scale);
    return inv;
  }

  /// this ∘ other: applies `other` first.
  Sim3 compose(const Sim3& other) const {
    Sim3 r;
    r.scale = scale * other.scale;
    r.rotation = (rotation * other.rotation).normalized().canonical();
    r.translation = apply(other.translation);
    return r;
  }

  bool valid() const {
    return scale > 0 && std::isfinite(scale) && rotation.finite() &&
           std::abs(rotation.norm() - 1.0) < 1e-9 && translation.finite();
  }
};

inline Vec3 sim3_apply(const Sim3& t, const Vec3& x) { return t.apply(x); }
inline Sim3 sim3_inverse(const Sim3& t) { return t.inverse(); }

}  // namespace ocs
