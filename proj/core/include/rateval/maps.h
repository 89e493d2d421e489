#ifndef RATEVAL_MAPS_H_
#define RATEVAL_MAPS_H_

#include <cstddef>
#include <span>

#include "rateval/tensor.h"

namespace rateval {

// Strong wrappers over Tensor2D for the three 2-D maps that flow through the
// pipeline. Each constructor validates its invariant and throws on violation.

// Non-negative, finite T x T token relevance.
class RelevanceMap {
 public:
  explicit RelevanceMap(Tensor2D values);
  const Tensor2D& values() const { return values_; }
  std::size_t rows() const { return values_.dim(0); }
  std::size_t cols() const { return values_.dim(1); }

 private:
  Tensor2D values_;
};

// Non-negative, finite pixel-level explanation heatmap (height x width).
class Heatmap {
 public:
  explicit Heatmap(Tensor2D values);
  const Tensor2D& values() const { return values_; }
  std::size_t height() const { return values_.dim(0); }
  std::size_t width() const { return values_.dim(1); }

 private:
  Tensor2D values_;
};

// Binary ground-truth object mask: every entry is exactly 0.0 or 1.0.
class GroundTruthMask {
 public:
  explicit GroundTruthMask(Tensor2D values);
  const Tensor2D& values() const { return values_; }
  std::size_t height() const { return values_.dim(0); }
  std::size_t width() const { return values_.dim(1); }
  bool at(std::size_t row, std::size_t col) const {
    return values_(row, col) != 0.0;
  }

 private:
  Tensor2D values_;
};

}  // namespace rateval

#endif  // RATEVAL_MAPS_H_
