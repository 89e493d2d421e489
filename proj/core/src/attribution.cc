#include "rateval/attribution.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "rateval/resample.h"

namespace rateval {
namespace {

void RequireSameShape(const Tensor3D& a, const Tensor3D& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(what) + ": " + ShapeString(a) + " vs " +
                    ShapeString(b));
  }
}

void RequireSquareSlices(const Tensor3D& t) {
  if (t.dim(1) != t.dim(2)) {
    throw Error(ErrorCode::kShapeMismatch,
                "attention slices must be T x T, got " + ShapeString(t));
  }
}

// Shared head reduction: out[i] = mean_h max(0, term(h, i)).
template <typename Term>
RelevanceMap HeadMeanOfPositivePart(const Tensor3D& shape_source, Term term) {
  const std::size_t heads = shape_source.dim(0);
  const std::size_t rows = shape_source.dim(1);
  const std::size_t cols = shape_source.dim(2);
  const std::size_t n = rows * cols;
  Tensor2D out({rows, cols}, DType::kFloat64);
  auto acc = out.mutable_data();
  for (std::size_t h = 0; h < heads; ++h) {
    for (std::size_t i = 0; i < n; ++i) {
      const double v = term(h * n + i);
      if (v > 0.0) acc[i] += v;
    }
  }
  const double inv = 1.0 / static_cast<double>(heads);
  for (double& v : acc) v *= inv;
  return RelevanceMap(std::move(out));
}

}  // namespace

AttributionMethod ParseAttributionMethod(std::string_view name) {
  if (name == "eq2" || name == "attention_gradient") {
    return AttributionMethod::kAttentionGradient;
  }
  if (name == "grad_only") return AttributionMethod::kGradientOnly;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown attribution method '" + std::string(name) +
                  "' (expected eq2 or grad_only)");
}

std::string_view AttributionMethodName(AttributionMethod method) {
  return method == AttributionMethod::kAttentionGradient ? "eq2" : "grad_only";
}

LayerMode ParseLayerMode(std::string_view name) {
  if (name == "last") return LayerMode::kLast;
  if (name == "mean") return LayerMode::kMean;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown layer mode '" + std::string(name) +
                  "' (expected last or mean)");
}

std::string_view LayerModeName(LayerMode mode) {
  return mode == LayerMode::kLast ? "last" : "mean";
}

void ValidateCapture(const AttentionCapture& capture, double row_sum_tolerance) {
  if (capture.layers.empty()) {
    throw Error(ErrorCode::kEmptyLayerList, "capture has no layers");
  }
  const Tensor3D& first = capture.layers.front().attention;
  RequireSquareSlices(first);
  const std::size_t tokens = first.dim(1);

  for (std::size_t l = 0; l < capture.layers.size(); ++l) {
    const LayerCapture& layer = capture.layers[l];
    const std::string where = "layer " + std::to_string(l);
    RequireSameShape(layer.attention, layer.gradient, (where + " A vs gradA").c_str());
    RequireSameShape(layer.attention, first, (where + " vs layer 0").c_str());

    for (double v : layer.gradient.data()) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kInvalidCapture, where + ": non-finite gradient");
      }
    }
    const auto& a = layer.attention;
    for (std::size_t h = 0; h < a.dim(0); ++h) {
      for (std::size_t r = 0; r < tokens; ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < tokens; ++c) {
          const double v = a(h, r, c);
          if (!std::isfinite(v) || v < 0.0) {
            throw Error(ErrorCode::kInvalidCapture,
                        where + ": attention entry is negative or non-finite");
          }
          sum += v;
        }
        if (std::abs(sum - 1.0) > row_sum_tolerance) {
          throw Error(ErrorCode::kInvalidCapture,
                      where + " head " + std::to_string(h) + " row " +
                          std::to_string(r) + " sums to " + std::to_string(sum));
        }
      }
    }
  }

  if (capture.cls_index >= tokens) {
    throw Error(ErrorCode::kInvalidCapture,
                "cls_index " + std::to_string(capture.cls_index) +
                    " out of range for " + std::to_string(tokens) + " tokens");
  }
  std::vector<std::size_t> dropped = capture.non_image_tokens;
  dropped.push_back(capture.cls_index);
  std::sort(dropped.begin(), dropped.end());
  dropped.erase(std::unique(dropped.begin(), dropped.end()), dropped.end());
  if (!dropped.empty() && dropped.back() >= tokens) {
    throw Error(ErrorCode::kInvalidCapture, "non-image token index out of range");
  }
  if (capture.grid.rows * capture.grid.cols + dropped.size() != tokens) {
    throw Error(ErrorCode::kGridMismatch,
                "grid " + std::to_string(capture.grid.rows) + "x" +
                    std::to_string(capture.grid.cols) + " plus " +
                    std::to_string(dropped.size()) +
                    " non-image tokens does not cover " +
                    std::to_string(tokens) + " tokens");
  }
}

RelevanceMap RelevanceSingleLayer(const Tensor3D& attention,
                                  const Tensor3D& gradient) {
  RequireSameShape(attention, gradient, "A vs gradA");
  const auto a = attention.data();
  const auto g = gradient.data();
  return HeadMeanOfPositivePart(attention,
                                [&](std::size_t k) { return g[k] * a[k]; });
}

RelevanceMap RelevanceGradOnly(const Tensor3D& gradient) {
  const auto g = gradient.data();
  return HeadMeanOfPositivePart(gradient, [&](std::size_t k) { return g[k]; });
}

RelevanceMap AggregateLayers(std::span<const RelevanceMap> maps, LayerMode mode) {
  if (maps.empty()) {
    throw Error(ErrorCode::kEmptyLayerList, "no relevance maps to aggregate");
  }
  const auto& shape = maps.front().values().shape();
  for (const RelevanceMap& m : maps) {
    if (m.values().shape() != shape) {
      throw Error(ErrorCode::kShapeMismatch,
                  "relevance maps differ in shape: " + ShapeString(m.values()) +
                      " vs " + ShapeString(maps.front().values()));
    }
  }
  if (mode == LayerMode::kLast || maps.size() == 1) return maps.back();

  Tensor2D sum(shape, DType::kFloat64);
  auto acc = sum.mutable_data();
  for (const RelevanceMap& m : maps) {
    const auto v = m.values().data();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
  }
  const double inv = 1.0 / static_cast<double>(maps.size());
  for (double& v : acc) v *= inv;
  return RelevanceMap(std::move(sum));
}

Heatmap ProjectToHeatmap(const RelevanceMap& relevance, std::size_t cls_index,
                         std::span<const std::size_t> non_image_tokens,
                         PatchGrid grid, std::size_t out_height,
                         std::size_t out_width) {
  const std::size_t tokens = relevance.cols();
  if (cls_index >= relevance.rows() || cls_index >= tokens) {
    throw Error(ErrorCode::kGridMismatch,
                "cls_index " + std::to_string(cls_index) + " has no row in a " +
                    std::to_string(relevance.rows()) + "-row relevance map");
  }
  std::vector<bool> drop(tokens, false);
  drop[cls_index] = true;
  for (std::size_t t : non_image_tokens) {
    if (t >= tokens) {
      throw Error(ErrorCode::kGridMismatch,
                  "non-image token " + std::to_string(t) + " out of range");
    }
    drop[t] = true;
  }
  std::vector<double> patches;
  patches.reserve(tokens);
  for (std::size_t t = 0; t < tokens; ++t) {
    if (!drop[t]) patches.push_back(relevance.values()(cls_index, t));
  }
  if (grid.rows == 0 || grid.cols == 0 || patches.size() != grid.rows * grid.cols) {
    throw Error(ErrorCode::kGridMismatch,
                std::to_string(patches.size()) + " image tokens cannot fill a " +
                    std::to_string(grid.rows) + "x" + std::to_string(grid.cols) +
                    " grid");
  }
  Tensor2D patch_map({grid.rows, grid.cols}, std::move(patches));
  Tensor2D pixels = ResampleBilinear(patch_map, out_height, out_width);
  for (double& v : pixels.mutable_data()) v = std::max(v, 0.0);
  return Heatmap(std::move(pixels));
}

Heatmap ComputeHeatmap(const AttentionCapture& capture, AttributionMethod method,
                       LayerMode mode, std::size_t out_height,
                       std::size_t out_width) {
  ValidateCapture(capture);
  std::vector<RelevanceMap> per_layer;
  per_layer.reserve(capture.layers.size());
  for (const LayerCapture& layer : capture.layers) {
    per_layer.push_back(method == AttributionMethod::kAttentionGradient
                            ? RelevanceSingleLayer(layer.attention, layer.gradient)
                            : RelevanceGradOnly(layer.gradient));
  }
  const RelevanceMap combined = AggregateLayers(per_layer, mode);
  return ProjectToHeatmap(combined, capture.cls_index, capture.non_image_tokens,
                          capture.grid, out_height, out_width);
}

}  // namespace rateval
