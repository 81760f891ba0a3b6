#include "ocs/io/scene.hpp"

#include "ocs/core/error.hpp"

namespace ocs::io {

void write_scene(const SceneDescriptor& s, const std::filesystem::path& path) {
  json j;
  j["camera"] = camera_to_json(s.camera);
  json arr = json::array();
  for (const auto& inst : s.instances) {
    arr.push_back(json{{"id", inst.id},
                       {"label_id", inst.label_id},
                       {"label_name", inst.label_name},
                       {"sim3", sim3_to_json(inst.sim3)},
                       {"pixel_count", inst.pixel_count},
                       {"inlier_count", inst.inlier_count}});
  }
  j["instances"] = arr;
  if (!s.provenance.is_null()) j["provenance"] = s.provenance;
  save_json(path, j);
}

SceneDescriptor read_scene(const std::filesystem::path& path) {
  const json j = load_json(path);
  SceneDescriptor s;
  s.camera = camera_from_json(j.at("camera"));
  for (const auto& e : j.at("instances")) {
    InstanceRecord r;
    r.id = e.at("id").get<int>();
    r.label_id = e.at("label_id").get<int>();
    r.label_name = e.at("label_name").get<std::string>();
    r.sim3 = sim3_from_json(e.at("sim3"));
    r.pixel_count = e.at("pixel_count").get<std::size_t>();
    r.inlier_count = e.at("inlier_count").get<std::size_t>();
    if (r.inlier_count > r.pixel_count)
      throw InputError("scene: inlier_count exceeds pixel_count for instance " +
                       std::to_string(r.id));
    s.instances.push_back(r);
  }
  if (j.contains("provenance")) s.provenance = j.at("provenance");
  return s;
}

}  // namespace ocs::io
