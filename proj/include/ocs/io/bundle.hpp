#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ocs/core/camera.hpp"
#include "ocs/core/tensor.hpp"
#include "ocs/io/json_util.hpp"

namespace ocs::io {

enum class DepthKind { Metric, CanonicalInverse };

struct Vocab {
  Tensor<float> embeddings;  // C x D, rows unit-normalized
  std::vector<std::string> names;
  int background_index = 0;

  std::size_t size() const { return names.size(); }
};

/// Per-pixel prediction bundle. Depth is held metric in memory; bundles stored
/// as canonical inverse depth are converted on load via d = f_w / (W * C).
struct DenseMaps {
  Tensor<float> depth;         // H x W, meters
  Tensor<float> embeddings;    // H x W x D
  Tensor<float> nocs;          // H x W x 3, in [0, 1]
  Tensor<float> gauss_params;  // H x W x k x 14
  double fov_w = 0.0, fov_h = 0.0;  // radians
  int k = 2;
  Vocab vocab;
  DepthKind stored_depth_kind = DepthKind::Metric;
  Tensor<std::uint16_t> gt_mask;  // H x W instance ids, 0 = background; may be empty
  json provenance;                // opaque; round-tripped verbatim

  int height() const { return static_cast<int>(depth.dim(0)); }
  int width() const { return static_cast<int>(depth.dim(1)); }
  int embed_dim() const { return static_cast<int>(embeddings.dim(2)); }

  CameraIntrinsics camera() const {
    return intrinsics_from_fov(fov_w, fov_h, width(), height());
  }
};

/// Reads meta.json + tensor files, validating shapes, dtype, NaN-free depth,
/// and NOCS range. Accepts either a decoded nocs.npy or the bin/delta pair.
DenseMaps read_bundle(const std::filesystem::path& dir);

/// Inverse of read_bundle; byte output deterministic for identical input.
void write_bundle(const DenseMaps& m, const std::filesystem::path& dir);

}  // namespace ocs::io
