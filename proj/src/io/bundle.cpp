#include "ocs/io/bundle.hpp"

#include <cmath>
#include <filesystem>

#include "ocs/core/error.hpp"
#include "ocs/io/npy.hpp"
#include "ocs/nocs/codec.hpp"

namespace ocs::io {

namespace fs = std::filesystem;

namespace {

void require_shape(const NpyArray& a, const std::vector<std::size_t>& shape,
                   const std::string& name) {
  if (a.shape != shape) {
    std::string want = "(", got = "(";
    for (auto s : shape) want += std::to_string(s) + ",";
    for (auto s : a.shape) got += std::to_string(s) + ",";
    throw InputError("bundle: " + name + " shape mismatch: expected " + want + ") got " +
                     got + ")");
  }
}

}  // namespace

DenseMaps read_bundle(const fs::path& dir) {
  const json meta = load_json(dir / "meta.json");

  DenseMaps m;
  const auto h = meta.at("height").get<std::size_t>();
  const auto w = meta.at("width").get<std::size_t>();
  const auto d = meta.at("embed_dim").get<std::size_t>();
  m.k = meta.at("gaussians_per_pixel").get<int>();
  m.fov_w = meta.at("fov").at(0).get<double>();
  m.fov_h = meta.at("fov").at(1).get<double>();
  const std::string depth_kind = meta.at("depth_kind").get<std::string>();
  if (depth_kind != "metric" && depth_kind != "canonical_inverse")
    throw InputError("bundle: unknown depth_kind '" + depth_kind + "'");
  m.stored_depth_kind =
      depth_kind == "metric" ? DepthKind::Metric : DepthKind::CanonicalInverse;
  if (meta.contains("provenance")) m.provenance = meta.at("provenance");

  NpyArray depth = read_npy_checked(dir / "depth.npy", NpyDtype::F32, 2);
  require_shape(depth, {h, w}, "depth.npy");
  NpyArray emb = read_npy_checked(dir / "embeddings.npy", NpyDtype::F32, 3);
  require_shape(emb, {h, w, d}, "embeddings.npy");
  NpyArray gauss = read_npy_checked(dir / "gaussians.npy", NpyDtype::F32, 4);
  require_shape(gauss, {h, w, static_cast<std::size_t>(m.k), 14}, "gaussians.npy");

  m.depth = to_tensor_f32(depth);
  for (std::size_t i = 0; i < m.depth.size(); ++i) {
    if (std::isnan(m.depth[i]))
      throw InputError("bundle: NaN depth at pixel (" + std::to_string(i % w) + ", " +
                       std::to_string(i / w) + ")");
  }
  if (m.stored_depth_kind == DepthKind::CanonicalInverse) {
    const double f_w = w / (2.0 * std::tan(m.fov_w / 2.0));
    for (std::size_t i = 0; i < m.depth.size(); ++i) {
      const double c = m.depth[i];
      if (!(c > 0))
        throw InputError("bundle: nonpositive canonical inverse depth at pixel (" +
                         std::to_string(i % w) + ", " + std::to_string(i / w) + ")");
      m.depth[i] = static_cast<float>(f_w / (w * c));
    }
  }
  m.embeddings = to_tensor_f32(emb);
  m.gauss_params = to_tensor_f32(gauss);

  // NOCS: decoded map or bin/delta pair.
  const std::string nocs_encoding =
      meta.value("nocs_encoding", std::string("decoded"));
  if (nocs_encoding == "decoded") {
    NpyArray nocs = read_npy_checked(dir / "nocs.npy", NpyDtype::F32, 3);
    require_shape(nocs, {h, w, 3}, "nocs.npy");
    m.nocs = to_tensor_f32(nocs);
  } else if (nocs_encoding == "bin_delta") {
    const int bins = meta.value("nocs_bins", nocs::kDefaultBins);
    NpyArray binsa = read_npy_checked(dir / "nocs_bins.npy", NpyDtype::U8, 3);
    require_shape(binsa, {h, w, 3}, "nocs_bins.npy");
    NpyArray delta = read_npy_checked(dir / "nocs_delta.npy", NpyDtype::F32, 3);
    require_shape(delta, {h, w, 3}, "nocs_delta.npy");
    m.nocs = Tensor<float>({h, w, 3});
    for (std::size_t i = 0; i < m.nocs.size(); ++i)
      m.nocs[i] = static_cast<float>(nocs::decode(binsa.u8()[i], delta.f32()[i], bins));
  } else {
    throw InputError("bundle: unknown nocs_encoding '" + nocs_encoding + "'");
  }
  for (std::size_t i = 0; i < m.nocs.size(); ++i) {
    const float v = m.nocs[i];
    if (!(v >= -1e-6f && v <= 1.0f + 1e-6f))
      throw InputError("bundle: NOCS value outside [0, 1] at flat index " +
                       std::to_string(i));
  }

  // Vocabulary.
  const json& vj = meta.at("vocab");
  m.vocab.names = vj.at("names").get<std::vector<std::string>>();
  m.vocab.background_index = vj.at("background_index").get<int>();
  NpyArray vocab = read_npy_checked(dir / "vocab.npy", NpyDtype::F32, 2);
  require_shape(vocab, {m.vocab.names.size(), d}, "vocab.npy");
  m.vocab.embeddings = to_tensor_f32(vocab);
  if (m.vocab.background_index < 0 ||
      m.vocab.background_index >= static_cast<int>(m.vocab.size()))
    throw InputError("bundle: background_index out of range");

  if (fs::exists(dir / "gt_mask.npy")) {
    NpyArray mask = read_npy_checked(dir / "gt_mask.npy", NpyDtype::U16, 2);
    require_shape(mask, {h, w}, "gt_mask.npy");
    m.gt_mask = to_tensor_u16(mask);
  }
  return m;
}

void write_bundle(const DenseMaps& m, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);

  json meta;
  meta["bundle"] = "dense-maps-v1";
  meta["height"] = m.depth.dim(0);
  meta["width"] = m.depth.dim(1);
  meta["embed_dim"] = m.embeddings.dim(2);
  meta["gaussians_per_pixel"] = m.k;
  meta["fov"] = {m.fov_w, m.fov_h};
  meta["depth_kind"] = "metric";  // in-memory depth is always metric
  meta["nocs_encoding"] = "decoded";
  meta["vocab"] = {{"names", m.vocab.names}, {"background_index", m.vocab.background_index}};
  if (!m.provenance.is_null()) meta["provenance"] = m.provenance;
  save_json(dir / "meta.json", meta);

  write_npy(dir / "depth.npy", m.depth);
  write_npy(dir / "embeddings.npy", m.embeddings);
  write_npy(dir / "nocs.npy", m.nocs);
  write_npy(dir / "gaussians.npy", m.gauss_params);
  write_npy(dir / "vocab.npy", m.vocab.embeddings);
  if (!m.gt_mask.empty()) write_npy(dir / "gt_mask.npy", m.gt_mask);
}

}  // namespace ocs::io
