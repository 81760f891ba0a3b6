#pragma once

#include <json.hpp>

#include "ocs/core/camera.hpp"
#include "ocs/core/sim3.hpp"

namespace ocs::io {

using json = nlohmann::json;

json sim3_to_json(const Sim3& t);
Sim3 sim3_from_json(const json& j);

json camera_to_json(const CameraIntrinsics& k);
CameraIntrinsics camera_from_json(const json& j);

/// Loads and parses a JSON file, wrapping failures in InputError.
json load_json(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const json& j);

/// FNV-1a hash of a canonical dump, as fixed-width hex. Used for provenance.
std::string json_hash(const json& j);

}  // namespace ocs::io
