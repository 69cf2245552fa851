#ifndef SDF_TENSOR_IO_HPP
#define SDF_TENSOR_IO_HPP

#include <filesystem>

#include "sdf/engine.hpp"

namespace sdf {

/// NumPy .npy (format 1.0, '<f4', C order).
void write_npy(const std::filesystem::path& path, const Tensor4& tensor);
Tensor4 read_npy(const std::filesystem::path& path);

}  // namespace sdf

#endif  // SDF_TENSOR_IO_HPP
