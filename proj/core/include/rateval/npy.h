#ifndef RATEVAL_NPY_H_
#define RATEVAL_NPY_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rateval/tensor.h"

namespace rateval {

// Reader and writer for the subset of the NPY v1.0 format used by this
// toolkit: C-order, little-endian '<f4' / '<f8', rank 2 or 3.

struct NpyHeader {
  DType dtype = DType::kFloat64;
  std::vector<std::size_t> shape;
  std::size_t data_offset = 0;  // bytes from file start to the payload
};

using AnyTensor = std::variant<Tensor2D, Tensor3D>;

NpyHeader ParseNpyHeader(std::span<const std::byte> bytes);
AnyTensor ParseNpy(std::span<const std::byte> bytes);

std::string SerializeNpy(const Tensor2D& t);
std::string SerializeNpy(const Tensor3D& t);

// Reads only as much of the file as needed to decode the header.
NpyHeader ReadNpyHeader(const std::filesystem::path& path);

AnyTensor ReadNpy(const std::filesystem::path& path);
Tensor2D ReadNpy2D(const std::filesystem::path& path);
Tensor3D ReadNpy3D(const std::filesystem::path& path);

void WriteNpy(const Tensor2D& t, const std::filesystem::path& path);
void WriteNpy(const Tensor3D& t, const std::filesystem::path& path);

// Whole-file helpers shared with the manifest and report writers. WriteFile
// goes through a sibling temp file and a rename.
std::vector<std::byte> ReadFileBytes(const std::filesystem::path& path);
void WriteFileAtomic(const std::filesystem::path& path, std::string_view data);

}  // namespace rateval

#endif  // RATEVAL_NPY_H_
