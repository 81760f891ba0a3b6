#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ocs/core/tensor.hpp"

namespace ocs::io {

// NPY version 1.0 container: "\x93NUMPY" magic, python-dict header padded to a
// 64-byte boundary, row-major little-endian payload. Writes are byte-exact
// reproducible for identical input.

enum class NpyDtype { F32, F64, U8, U16 };

std::string npy_descr(NpyDtype d);
std::size_t npy_item_size(NpyDtype d);

struct NpyArray {
  NpyDtype dtype = NpyDtype::F32;
  std::vector<std::size_t> shape;
  std::vector<char> raw;

  std::size_t count() const { return Tensor<float>::count(shape); }
  const float* f32() const { return reinterpret_cast<const float*>(raw.data()); }
  const double* f64() const { return reinterpret_cast<const double*>(raw.data()); }
  const std::uint8_t* u8() const { return reinterpret_cast<const std::uint8_t*>(raw.data()); }
  const std::uint16_t* u16() const {
    return reinterpret_cast<const std::uint16_t*>(raw.data());
  }
};

void write_npy(const std::filesystem::path& path, NpyDtype dtype,
               const std::vector<std::size_t>& shape, const void* data);

NpyArray read_npy(const std::filesystem::path& path);

/// read_npy + dtype/rank validation with a descriptive InputError.
NpyArray read_npy_checked(const std::filesystem::path& path, NpyDtype dtype,
                          std::size_t rank);

Tensor<float> to_tensor_f32(const NpyArray& a);
Tensor<std::uint16_t> to_tensor_u16(const NpyArray& a);
Tensor<std::uint8_t> to_tensor_u8(const NpyArray& a);

void write_npy(const std::filesystem::path& path, const Tensor<float>& t);
void write_npy(const std::filesystem::path& path, const Tensor<double>& t);
void write_npy(const std::filesystem::path& path, const Tensor<std::uint16_t>& t);
void write_npy(const std::filesystem::path& path, const Tensor<std::uint8_t>& t);

}  // namespace ocs::io
