#include "rateval/maps.h"

#include <cmath>
#include <string>
#include <utility>

namespace rateval {
namespace {

void CheckNonNegativeFinite(const Tensor2D& t, ErrorCode code,
                            const char* what) {
  const auto data = t.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i]) || data[i] < 0.0) {
      throw Error(code, std::string(what) + " entry " + std::to_string(i) +
                            " is " + std::to_string(data[i]) +
                            " (must be finite and >= 0)");
    }
  }
}

}  // namespace

RelevanceMap::RelevanceMap(Tensor2D values) : values_(std::move(values)) {
  CheckNonNegativeFinite(values_, ErrorCode::kInvalidCapture, "relevance");
}

Heatmap::Heatmap(Tensor2D values) : values_(std::move(values)) {
  CheckNonNegativeFinite(values_, ErrorCode::kInvalidHeatmap, "heatmap");
}

GroundTruthMask::GroundTruthMask(Tensor2D values) : values_(std::move(values)) {
  const auto data = values_.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i] != 0.0 && data[i] != 1.0) {
      throw Error(ErrorCode::kMaskNotBinary,
                  "mask entry " + std::to_string(i) + " is " +
                      std::to_string(data[i]) + " (must be 0 or 1)");
    }
  }
}

}  // namespace rateval
