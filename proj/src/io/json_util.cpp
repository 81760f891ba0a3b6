#include "ocs/io/json_util.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "ocs/core/error.hpp"
#include "ocs/core/rng.hpp"

namespace ocs::io {

json sim3_to_json(const Sim3& t) {
  return json{{"scale", t.scale},
              {"quat", {t.rotation.w, t.rotation.x, t.rotation.y, t.rotation.z}},
              {"t", {t.translation.x, t.translation.y, t.translation.z}}};
}

Sim3 sim3_from_json(const json& j) {
  Sim3 t;
  t.scale = j.at("scale").get<double>();
  const auto& q = j.at("quat");
  t.rotation = Quat{q.at(0).get<double>(), q.at(1).get<double>(), q.at(2).get<double>(),
                    q.at(3).get<double>()};
  const auto& v = j.at("t");
  t.translation = Vec3{v.at(0).get<double>(), v.at(1).get<double>(), v.at(2).get<double>()};
  if (!t.valid()) throw InputError("sim3_from_json: invalid transform (scale/quat)");
  return t;
}

json camera_to_json(const CameraIntrinsics& k) {
  return json{{"f_w", k.f_w}, {"f_h", k.f_h},     {"c_x", k.c_x},
              {"c_y", k.c_y}, {"width", k.width}, {"height", k.height}};
}

CameraIntrinsics camera_from_json(const json& j) {
  CameraIntrinsics k;
  k.f_w = j.at("f_w").get<double>();
  k.f_h = j.at("f_h").get<double>();
  k.c_x = j.at("c_x").get<double>();
  k.c_y = j.at("c_y").get<double>();
  k.width = j.at("width").get<int>();
  k.height = j.at("height").get<int>();
  if (k.f_w <= 0 || k.f_h <= 0 || k.width <= 0 || k.height <= 0)
    throw InputError("camera_from_json: invalid intrinsics");
  return k;
}

json load_json(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw InputError("missing file: " + path.string());
  try {
    json j;
    f >> j;
    return j;
  } catch (const json::exception& e) {
    throw InputError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void save_json(const std::filesystem::path& path, const json& j) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw InputError("cannot open for writing: " + path.string());
  f << j.dump(2) << "\n";
  if (!f) throw InputError("write failed: " + path.string());
}

std::string json_hash(const json& j) {
  const std::string s = j.dump();
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << Rng::hash_str(s);
  return os.str();
}

}  // namespace ocs::io
