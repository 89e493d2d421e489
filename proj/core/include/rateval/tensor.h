#ifndef RATEVAL_TENSOR_H_
#define RATEVAL_TENSOR_H_

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rateval/error.h"

namespace rateval {

// Element type as stored on disk. Values are always held as double in
// memory; a kFloat32 tensor only ever holds float-representable values.
enum class DType { kFloat32, kFloat64 };

std::size_t ItemSize(DType dtype);

// Dense row-major array with a fixed rank. Every shape entry is >= 1 and
// data().size() equals the product of the shape.
template <std::size_t Rank>
class Tensor {
  static_assert(Rank == 2 || Rank == 3, "only 2-D and 3-D tensors");

 public:
  using Shape = std::array<std::size_t, Rank>;

  // A single zero element.
  Tensor() : dtype_(DType::kFloat64) {
    shape_.fill(1);
    data_.assign(1, 0.0);
  }

  explicit Tensor(Shape shape, DType dtype = DType::kFloat64)
      : shape_(shape), dtype_(dtype) {
    data_.assign(CheckedVolume(shape_), 0.0);
  }

  Tensor(Shape shape, std::vector<double> data,
         DType dtype = DType::kFloat64)
      : shape_(shape), data_(std::move(data)), dtype_(dtype) {
    const std::size_t volume = CheckedVolume(shape_);
    if (data_.size() != volume) {
      throw Error(ErrorCode::kInvalidShape,
                  "data length " + std::to_string(data_.size()) +
                      " does not match shape volume " +
                      std::to_string(volume));
    }
    if (dtype_ == DType::kFloat32) {
      for (double& v : data_) v = static_cast<double>(static_cast<float>(v));
    }
  }

  const Shape& shape() const { return shape_; }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  DType dtype() const { return dtype_; }

  std::span<const double> data() const { return data_; }
  std::span<double> mutable_data() { return data_; }

  double operator()(std::size_t r, std::size_t c) const
    requires(Rank == 2)
  {
    return data_[r * shape_[1] + c];
  }
  double& operator()(std::size_t r, std::size_t c)
    requires(Rank == 2)
  {
    return data_[r * shape_[1] + c];
  }
  double operator()(std::size_t h, std::size_t r, std::size_t c) const
    requires(Rank == 3)
  {
    return data_[(h * shape_[1] + r) * shape_[2] + c];
  }
  double& operator()(std::size_t h, std::size_t r, std::size_t c)
    requires(Rank == 3)
  {
    return data_[(h * shape_[1] + r) * shape_[2] + c];
  }

  // Contiguous view of one T x T slice of a 3-D tensor.
  std::span<const double> slice(std::size_t h) const
    requires(Rank == 3)
  {
    const std::size_t n = shape_[1] * shape_[2];
    return std::span<const double>(data_).subspan(h * n, n);
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  static std::size_t CheckedVolume(const Shape& shape) {
    std::size_t volume = 1;
    for (std::size_t d : shape) {
      if (d == 0) {
        throw Error(ErrorCode::kInvalidShape, "shape entries must be >= 1");
      }
      volume *= d;
    }
    return volume;
  }

  Shape shape_;
  std::vector<double> data_;
  DType dtype_;
};

using Tensor2D = Tensor<2>;
using Tensor3D = Tensor<3>;

std::string ShapeString(std::span<const std::size_t> shape);

template <std::size_t Rank>
std::string ShapeString(const Tensor<Rank>& t) {
  return ShapeString(std::span<const std::size_t>(t.shape()));
}

}  // namespace rateval

#endif  // RATEVAL_TENSOR_H_
