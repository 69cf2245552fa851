#include "sdf/tensor_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <regex>
#include <stdexcept>
#include <string>

namespace sdf {

namespace {

constexpr char kMagic[] = "\x93NUMPY";

}  // namespace

void write_npy(const std::filesystem::path& path, const Tensor4& tensor) {
  std::string header = "{'descr': '<f4', 'fortran_order': False, 'shape': (";
  for (std::size_t d : tensor.shape) header += std::to_string(d) + ", ";
  header.resize(header.size() - 2);
  header += "), }";
  const std::size_t preamble = 10;
  const std::size_t total = (preamble + header.size() + 1 + 63) / 64 * 64;
  header.append(total - preamble - header.size() - 1, ' ');
  header += '\n';

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(kMagic, 6);
  out.put(1);
  out.put(0);
  const auto len = static_cast<std::uint16_t>(header.size());
  out.put(static_cast<char>(len & 0xff));
  out.put(static_cast<char>(len >> 8));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(tensor.data.data()),
            static_cast<std::streamsize>(tensor.data.size() * sizeof(float)));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Tensor4 read_npy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  char pre[10];
  if (!in.read(pre, 10) || std::memcmp(pre, kMagic, 6) != 0 || pre[6] != 1) {
    throw std::runtime_error(path.string() + ": not a version 1 .npy file");
  }
  const std::size_t len = static_cast<unsigned char>(pre[8]) |
                          (static_cast<std::size_t>(static_cast<unsigned char>(pre[9])) << 8);
  std::string header(len, '\0');
  if (!in.read(header.data(), static_cast<std::streamsize>(len))) {
    throw std::runtime_error(path.string() + ": truncated header");
  }
  if (header.find("'descr': '<f4'") == std::string::npos ||
      header.find("'fortran_order': False") == std::string::npos) {
    throw std::runtime_error(path.string() + ": expected little-endian f32 in C order");
  }
  static const std::regex shape_re(R"('shape':\s*\((\d+),\s*(\d+),\s*(\d+),\s*(\d+)\))");
  std::smatch m;
  if (!std::regex_search(header, m, shape_re)) {
    throw std::runtime_error(path.string() + ": expected a rank-4 shape");
  }
  Tensor4 t(std::stoul(m[1]), std::stoul(m[2]), std::stoul(m[3]), std::stoul(m[4]));
  if (!in.read(reinterpret_cast<char*>(t.data.data()),
               static_cast<std::streamsize>(t.data.size() * sizeof(float)))) {
    throw std::runtime_error(path.string() + ": truncated data");
  }
  return t;
}

}  // namespace sdf
