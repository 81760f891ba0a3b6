#pragma once

#include <filesystem>

#include "ocs/core/tensor.hpp"

namespace ocs::io {

/// Writes an H x W x 3 image in [0, 1] as an 8-bit RGB PNG (values clamped,
/// rounded half-up). Uses stored deflate blocks, so the byte output is a pure
/// function of the pixel data.
void write_png(const std::filesystem::path& path, const Tensor<double>& image);

}  // namespace ocs::io
