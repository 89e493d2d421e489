#ifndef RATEVAL_ATTRIBUTION_H_
#define RATEVAL_ATTRIBUTION_H_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "rateval/maps.h"
#include "rateval/tensor.h"

namespace rateval {

// Attention map A and its gradient dy_t/dA for one transformer block, both
// heads x T x T.
struct LayerCapture {
  Tensor3D attention;
  Tensor3D gradient;
};

struct PatchGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
};

// Everything captured for one sample and one target class. The gradient is
// always taken for the annotated class, never the predicted one; the exporter
// records `target_class` so that can be checked.
struct AttentionCapture {
  std::vector<LayerCapture> layers;
  int target_class = 0;
  std::size_t cls_index = 0;
  // Token positions that carry no image patch. The CLS token is always
  // treated as non-image whether or not it is listed here.
  std::vector<std::size_t> non_image_tokens;
  PatchGrid grid;
};

enum class AttributionMethod {
  kAttentionGradient,  // E_h((gradA * A)+)
  kGradientOnly,       // E_h((gradA)+)
};

enum class LayerMode { kLast, kMean };

AttributionMethod ParseAttributionMethod(std::string_view name);
std::string_view AttributionMethodName(AttributionMethod method);
LayerMode ParseLayerMode(std::string_view name);
std::string_view LayerModeName(LayerMode mode);

// Checks the capture invariants: matching shapes across A and gradA and
// across layers, attention rows summing to 1 within `row_sum_tolerance`,
// finite values, cls_index < T, and gh * gw + |non-image tokens| == T.
// Throws Error(kInvalidCapture / kShapeMismatch / kGridMismatch).
void ValidateCapture(const AttentionCapture& capture,
                     double row_sum_tolerance = 1e-4);

// Mean over heads of max(0, gradA * A), elementwise.
RelevanceMap RelevanceSingleLayer(const Tensor3D& attention,
                                  const Tensor3D& gradient);

// Mean over heads of max(0, gradA). Same clip-then-average order as
// RelevanceSingleLayer with A replaced by ones, so the two are comparable.
RelevanceMap RelevanceGradOnly(const Tensor3D& gradient);

RelevanceMap AggregateLayers(std::span<const RelevanceMap> maps, LayerMode mode);

// Takes row `cls_index` of the relevance map, drops the CLS entry and every
// other non-image token, reshapes the rest row-major to the patch grid, and
// resamples it bilinearly (corner-anchored) to out_height x out_width.
Heatmap ProjectToHeatmap(const RelevanceMap& relevance, std::size_t cls_index,
                         std::span<const std::size_t> non_image_tokens,
                         PatchGrid grid, std::size_t out_height,
                         std::size_t out_width);

// Full per-sample pipeline: validate, per-layer relevance, aggregation,
// projection.
Heatmap ComputeHeatmap(const AttentionCapture& capture, AttributionMethod method,
                       LayerMode mode, std::size_t out_height,
                       std::size_t out_width);

}  // namespace rateval

#endif  // RATEVAL_ATTRIBUTION_H_
