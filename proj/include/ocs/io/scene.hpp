#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ocs/core/camera.hpp"
#include "ocs/core/sim3.hpp"
#include "ocs/io/json_util.hpp"

namespace ocs::io {

struct InstanceRecord {
  int id = 0;  // 1-based, matches mask.npy values and objects/obj_<id>.ply
  int label_id = 0;
  std::string label_name;
  Sim3 sim3;  // canonical -> camera
  std::size_t pixel_count = 0;
  std::size_t inlier_count = 0;
};

struct SceneDescriptor {
  CameraIntrinsics camera;
  std::vector<InstanceRecord> instances;
  json provenance;
};

void write_scene(const SceneDescriptor& s, const std::filesystem::path& path);
SceneDescriptor read_scene(const std::filesystem::path& path);

}  // namespace ocs::io
