#pragma once

#include <filesystem>

#include "ocs/gs/gaussians.hpp"
#include "ocs/io/bundle.hpp"
#include "ocs/io/scene.hpp"
#include "ocs/pose/pose.hpp"
#include "ocs/sem/semantics.hpp"

namespace ocs {

struct AssembleConfig {
  double tau = 0.07;
  sem::CrfConfig crf;
  pose::SplitConfig split;
  std::size_t min_pixels = 32;
  gs::CanonicalizeMode canonicalize = gs::CanonicalizeMode::MeansOnly;
  std::uint64_t seed = 0;
};

struct AssembledInstance {
  io::InstanceRecord record;
  std::vector<std::uint32_t> pixels;
  gs::GaussianSet canonical;
};

struct AssembleResult {
  io::SceneDescriptor scene;
  Tensor<std::uint16_t> mask;  // H x W, instance ids (1-based), 0 = unassigned
  std::vector<AssembledInstance> instances;
  sem::LabelMap labels;        // post-CRF
  sem::LabelMap unary_labels;  // pre-CRF argmax, for diagnostics
};

/// Full post-network pipeline: unaries -> CRF -> connected components ->
/// per-component multi-RANSAC pose splitting -> canonical Gaussians.
AssembleResult assemble(const io::DenseMaps& maps, const AssembleConfig& cfg);

/// scene.json + mask.npy + objects/obj_<id>.ply under `dir`.
void write_assembly(const AssembleResult& result, const std::filesystem::path& dir);

}  // namespace ocs
