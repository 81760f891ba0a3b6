#include "ocs/io/ply.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ocs/core/error.hpp"

namespace ocs::io {

namespace {

const char* kProps[14] = {"x",     "y",     "z",     "scale_0", "scale_1", "scale_2", "rot_0",
                          "rot_1", "rot_2", "rot_3", "opacity", "f_dc_0",  "f_dc_1",  "f_dc_2"};

}  // namespace

void export_gaussians_ply(const gs::GaussianSet& g, const std::filesystem::path& path) {
  std::ostringstream header;
  header << "ply\nformat binary_little_endian 1.0\n";
  header << "comment frame " << (g.frame == gs::Frame::Camera ? "camera" : "canonical")
         << "\n";
  header << "element vertex " << g.size() << "\n";
  for (const char* p : kProps) header << "property float " << p << "\n";
  header << "end_header\n";

  std::vector<float> payload;
  payload.reserve(g.size() * 14);
  for (const auto& p : g.primitives) {
    if (!p.finite()) throw DomainError("export_gaussians_ply: non-finite Gaussian parameter");
    const float row[14] = {
        static_cast<float>(p.mean.x),        static_cast<float>(p.mean.y),
        static_cast<float>(p.mean.z),        static_cast<float>(p.log_scale.x),
        static_cast<float>(p.log_scale.y),   static_cast<float>(p.log_scale.z),
        static_cast<float>(p.rotation.w),    static_cast<float>(p.rotation.x),
        static_cast<float>(p.rotation.y),    static_cast<float>(p.rotation.z),
        static_cast<float>(gs::logit(p.opacity)), static_cast<float>(p.color.x),
        static_cast<float>(p.color.y),       static_cast<float>(p.color.z)};
    payload.insert(payload.end(), row, row + 14);
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError("ply: cannot open for writing: " + path.string());
  const std::string h = header.str();
  f.write(h.data(), static_cast<std::streamsize>(h.size()));
  f.write(reinterpret_cast<const char*>(payload.data()),
          static_cast<std::streamsize>(payload.size() * sizeof(float)));
  if (!f) throw InputError("ply: write failed: " + path.string());
}

gs::GaussianSet import_gaussians_ply(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("ply: missing file: " + path.string());

  gs::GaussianSet out;
  std::string line;
  std::size_t vertex_count = 0;
  std::vector<std::string> props;
  bool binary_le = false;
  if (!std::getline(f, line) || line != "ply") throw InputError("ply: bad magic: " + path.string());
  while (std::getline(f, line)) {
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "format") {
      std::string fmt;
      ls >> fmt;
      binary_le = fmt == "binary_little_endian";
    } else if (tok == "comment") {
      std::string key, val;
      ls >> key >> val;
      if (key == "frame")
        out.frame = (val == "canonical") ? gs::Frame::Canonical : gs::Frame::Camera;
    } else if (tok == "element") {
      std::string name;
      ls >> name >> vertex_count;
      if (name != "vertex") throw InputError("ply: unsupported element: " + name);
    } else if (tok == "property") {
      std::string type, name;
      ls >> type >> name;
      if (type != "float") throw InputError("ply: unsupported property type: " + type);
      props.push_back(name);
    } else if (tok == "end_header") {
      break;
    }
  }
  if (!binary_le) throw InputError("ply: only binary_little_endian supported: " + path.string());
  if (props.size() != 14)
    throw InputError("ply: expected 14 float properties in " + path.string());
  for (int i = 0; i < 14; ++i)
    if (props[i] != kProps[i])
      throw InputError("ply: unexpected property order at '" + props[i] + "' in " +
                       path.string());

  std::vector<float> payload(vertex_count * 14);
  f.read(reinterpret_cast<char*>(payload.data()),
         static_cast<std::streamsize>(payload.size() * sizeof(float)));
  if (static_cast<std::size_t>(f.gcount()) != payload.size() * sizeof(float))
    throw InputError("ply: truncated payload in " + path.string());

  out.primitives.reserve(vertex_count);
  for (std::size_t i = 0; i < vertex_count; ++i) {
    const float* r = payload.data() + i * 14;
    gs::GaussianPrimitive p;
    p.mean = {r[0], r[1], r[2]};
    p.log_scale = {r[3], r[4], r[5]};
    p.rotation = {r[6], r[7], r[8], r[9]};
    p.opacity = gs::sigmoid(r[10]);
    p.color = {r[11], r[12], r[13]};
    out.primitives.push_back(p);
  }
  return out;
}

}  // namespace ocs::io
