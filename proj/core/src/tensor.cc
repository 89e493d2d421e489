#include "rateval/tensor.h"

namespace rateval {

std::size_t ItemSize(DType dtype) {
  return dtype == DType::kFloat32 ? 4 : 8;
}

std::string ShapeString(std::span<const std::size_t> shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(shape[i]);
  }
  if (shape.size() == 1) out += ",";
  out += ")";
  return out;
}

}  // namespace rateval
