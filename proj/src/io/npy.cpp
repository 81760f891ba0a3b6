#include "ocs/io/npy.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "ocs/core/error.hpp"

namespace ocs::io {

namespace {

constexpr char kMagic[] = "\x93NUMPY";

std::string shape_repr(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    os << shape[i];
    if (shape.size() == 1 || i + 1 < shape.size()) os << ",";
    if (i + 1 < shape.size()) os << " ";
  }
  os << ")";
  return os.str();
}

NpyDtype dtype_from_descr(const std::string& d) {
  if (d == "<f4") return NpyDtype::F32;
  if (d == "<f8") return NpyDtype::F64;
  if (d == "|u1") return NpyDtype::U8;
  if (d == "<u2") return NpyDtype::U16;
  throw InputError("npy: unsupported dtype descr '" + d + "'");
}

}  // namespace

std::string npy_descr(NpyDtype d) {
  switch (d) {
    case NpyDtype::F32: return "<f4";
    case NpyDtype::F64: return "<f8";
    case NpyDtype::U8: return "|u1";
    case NpyDtype::U16: return "<u2";
  }
  return "<f4";
}

std::size_t npy_item_size(NpyDtype d) {
  switch (d) {
    case NpyDtype::F32: return 4;
    case NpyDtype::F64: return 8;
    case NpyDtype::U8: return 1;
    case NpyDtype::U16: return 2;
  }
  return 4;
}

void write_npy(const std::filesystem::path& path, NpyDtype dtype,
               const std::vector<std::size_t>& shape, const void* data) {
  std::string header = "{'descr': '" + npy_descr(dtype) +
                       "', 'fortran_order': False, 'shape': " + shape_repr(shape) + ", }";
  // Pad with spaces so magic(6) + version(2) + hlen(2) + header is a multiple
  // of 64, newline-terminated.
  const std::size_t base = 10 + header.size() + 1;
  const std::size_t padded = (base + 63) / 64 * 64;
  header.append(padded - base, ' ');
  header.push_back('\n');

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError("npy: cannot open for writing: " + path.string());
  f.write(kMagic, 6);
  const char version[2] = {1, 0};
  f.write(version, 2);
  const std::uint16_t hlen = static_cast<std::uint16_t>(header.size());
  const char lenb[2] = {static_cast<char>(hlen & 0xff), static_cast<char>(hlen >> 8)};
  f.write(lenb, 2);
  f.write(header.data(), static_cast<std::streamsize>(header.size()));
  const std::size_t bytes = Tensor<float>::count(shape) * npy_item_size(dtype);
  f.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  if (!f) throw InputError("npy: write failed: " + path.string());
}

NpyArray read_npy(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("npy: missing file: " + path.string());
  char magic[6];
  f.read(magic, 6);
  if (!f || std::memcmp(magic, kMagic, 6) != 0)
    throw InputError("npy: bad magic in " + path.string());
  char version[2];
  f.read(version, 2);
  if (version[0] != 1) throw InputError("npy: unsupported version in " + path.string());
  unsigned char lenb[2];
  f.read(reinterpret_cast<char*>(lenb), 2);
  const std::size_t hlen = lenb[0] | (static_cast<std::size_t>(lenb[1]) << 8);
  std::string header(hlen, '\0');
  f.read(header.data(), static_cast<std::streamsize>(hlen));
  if (!f) throw InputError("npy: truncated header in " + path.string());

  auto find_value = [&](const std::string& key) -> std::string {
    const auto kpos = header.find("'" + key + "'");
    if (kpos == std::string::npos)
      throw InputError("npy: header missing '" + key + "' in " + path.string());
    auto p = header.find(':', kpos);
    ++p;
    while (p < header.size() && header[p] == ' ') ++p;
    return header.substr(p);
  };

  NpyArray out;
  {
    std::string v = find_value("descr");
    if (v.empty() || v[0] != '\'') throw InputError("npy: bad descr in " + path.string());
    out.dtype = dtype_from_descr(v.substr(1, v.find('\'', 1) - 1));
  }
  {
    std::string v = find_value("fortran_order");
    if (v.rfind("False", 0) != 0)
      throw InputError("npy: fortran_order arrays unsupported: " + path.string());
  }
  {
    std::string v = find_value("shape");
    if (v.empty() || v[0] != '(') throw InputError("npy: bad shape in " + path.string());
    const auto close = v.find(')');
    std::string inner = v.substr(1, close - 1);
    std::size_t pos = 0;
    while (pos < inner.size()) {
      while (pos < inner.size() && (inner[pos] == ' ' || inner[pos] == ',')) ++pos;
      if (pos >= inner.size()) break;
      std::size_t end = pos;
      while (end < inner.size() && inner[end] >= '0' && inner[end] <= '9') ++end;
      if (end == pos) throw InputError("npy: bad shape in " + path.string());
      out.shape.push_back(std::stoull(inner.substr(pos, end - pos)));
      pos = end;
    }
  }

  const std::size_t bytes = out.count() * npy_item_size(out.dtype);
  out.raw.resize(bytes);
  f.read(out.raw.data(), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(f.gcount()) != bytes)
    throw InputError("npy: truncated payload in " + path.string());
  return out;
}

NpyArray read_npy_checked(const std::filesystem::path& path, NpyDtype dtype,
                          std::size_t rank) {
  NpyArray a = read_npy(path);
  if (a.dtype != dtype)
    throw InputError("npy: " + path.string() + ": expected dtype " + npy_descr(dtype) +
                     ", found " + npy_descr(a.dtype));
  if (a.shape.size() != rank)
    throw InputError("npy: " + path.string() + ": expected rank " + std::to_string(rank) +
                     ", found " + std::to_string(a.shape.size()));
  return a;
}

template <typename T>
static Tensor<T> to_tensor(const NpyArray& a) {
  Tensor<T> t(a.shape);
  std::memcpy(t.data(), a.raw.data(), a.raw.size());
  return t;
}

Tensor<float> to_tensor_f32(const NpyArray& a) { return to_tensor<float>(a); }
Tensor<std::uint16_t> to_tensor_u16(const NpyArray& a) { return to_tensor<std::uint16_t>(a); }
Tensor<std::uint8_t> to_tensor_u8(const NpyArray& a) { return to_tensor<std::uint8_t>(a); }

void write_npy(const std::filesystem::path& path, const Tensor<float>& t) {
  write_npy(path, NpyDtype::F32, t.shape(), t.data());
}
void write_npy(const std::filesystem::path& path, const Tensor<double>& t) {
  write_npy(path, NpyDtype::F64, t.shape(), t.data());
}
void write_npy(const std::filesystem::path& path, const Tensor<std::uint16_t>& t) {
  write_npy(path, NpyDtype::U16, t.shape(), t.data());
}
void write_npy(const std::filesystem::path& path, const Tensor<std::uint8_t>& t) {
  write_npy(path, NpyDtype::U8, t.shape(), t.data());
}

}  // namespace ocs::io
