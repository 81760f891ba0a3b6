#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ocs/core/camera.hpp"
#include "ocs/core/sim3.hpp"
#include "ocs/io/bundle.hpp"
#include "ocs/render/views.hpp"

namespace ocs::oracle {

enum class Shape { Box, Sphere, Cylinder };

std::string shape_name(Shape s);
Shape shape_from_name(const std::string& name);

/// Procedural albedo over canonical coordinates.
struct Texture {
  enum class Kind { Solid, Checker } kind = Kind::Solid;
  Vec3 color_a{0.8, 0.8, 0.8};
  Vec3 color_b{0.2, 0.2, 0.2};
  int cells = 4;

  Vec3 sample(const Vec3& canonical) const;
};

/// Canonical extent is exactly the unit cube [0,1]^3 (sphere and cylinder
/// inscribed), so NOCS values equal canonical hit coordinates.
struct PrimitiveObject {
  Shape shape = Shape::Box;
  int label_id = 1;
  std::string label_name;
  Sim3 pose;  // canonical -> camera
  Texture texture;
};

struct NoiseConfig {
  double depth_sigma = 0.0;        // multiplicative, d *= 1 + sigma * N(0,1)
  double nocs_sigma = 0.0;         // additive per channel, clamped to [0,1]
  double embed_rot_deg = 0.0;      // rotate embeddings toward a random direction
  double label_flip_rate = 0.0;    // per-pixel chance of mixing in a wrong class
  double flip_mix = 0.55;          // blend factor for flipped embeddings
};

struct SceneConfig {
  int object_count = 5;
  std::uint64_t seed = 0;
  double fov = 1.3089969389957472;  // 75 degrees
  int resolution = 128;
  int embed_dim = 16;
  NoiseConfig noise;
};

struct SceneOracle {
  std::vector<PrimitiveObject> objects;
  CameraIntrinsics camera;
  io::Vocab vocab;  // index 0 is the "other" background row
  std::uint64_t seed = 0;
  double ground_y = 0.5;       // camera height above the ground plane (+y is down)
  double camera_pitch = 0.32;  // radians, camera tilted down toward the tabletop
  NoiseConfig noise;
};

/// Non-intersecting objects resting on the ground plane inside the frustum;
/// byte-identical output per seed. Throws Error when placement cannot succeed
/// within bounded retries.
SceneOracle generate_scene(const SceneConfig& cfg);

/// Analytic first-hit maps: metric depth, instance ids (gt_mask, 0 background),
/// NOCS = pose^-1(hit), class-vector embeddings, zero-offset surface Gaussians.
/// Noise knobs from the scene config are applied here.
io::DenseMaps raycast_maps(const SceneOracle& scene);

/// Flat-albedo ray-cast of one canonical primitive from an arbitrary camera.
render::Image raycast_primitive_image(const PrimitiveObject& obj,
                                      const render::CameraPose& pose,
                                      const CameraIntrinsics& cam,
                                      const Vec3& background = {1, 1, 1},
                                      Tensor<std::uint8_t>* hit_mask = nullptr);

/// Pre-rendered ground-truth views of the object in its canonical frame.
std::vector<render::Image> canonical_gt_renders(const PrimitiveObject& obj,
                                                const render::CanonicalViewSet& views);

/// Uniform-area surface samples in canonical coordinates, deterministic per seed.
std::vector<Vec3> sample_surface_points(const PrimitiveObject& obj, int n,
                                        std::uint64_t seed);

/// First positive ray parameter against the canonical primitive, if any.
/// Ray is origin + tau * dir in canonical coordinates.
std::optional<double> intersect_canonical(Shape shape, const Vec3& origin, const Vec3& dir);

// gt_poses.json: camera + per-instance label, shape, pose, and texture.
void write_gt_poses(const SceneOracle& scene, const std::filesystem::path& path);

/// raycast_maps + write_bundle + gt_poses.json. When noise knobs are active the
/// clean depth/NOCS references are written as gt_depth.npy / gt_nocs.npy.
void write_scene_bundle(const SceneOracle& scene, const std::filesystem::path& dir,
                        const io::json& provenance = {});

struct GtScene {
  CameraIntrinsics camera;
  std::vector<PrimitiveObject> objects;  // instance id = index + 1
};
GtScene read_gt_poses(const std::filesystem::path& path);

}  // namespace ocs::oracle
