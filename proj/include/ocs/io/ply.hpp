#pragma once

#include <filesystem>

#include "ocs/gs/gaussians.hpp"

namespace ocs::io {

/// Binary little-endian PLY, one vertex per Gaussian with float properties
/// x, y, z, scale_0..2 (log), rot_0..3 (quat wxyz), opacity (logit),
/// f_dc_0..2 (linear RGB). Frame tag recorded as a header comment.
void export_gaussians_ply(const gs::GaussianSet& g, const std::filesystem::path& path);

gs::GaussianSet import_gaussians_ply(const std::filesystem::path& path);

}  // namespace ocs::io
