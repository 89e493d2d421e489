#include "rateval/metrics.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "rateval/resample.h"

namespace rateval {
namespace {

void RequireSameShape(const Heatmap& h, const GroundTruthMask& m) {
  if (h.values().shape() != m.values().shape()) {
    throw Error(ErrorCode::kShapeMismatch,
                "heatmap " + ShapeString(h.values()) + " vs mask " +
                    ShapeString(m.values()));
  }
}

std::string BoxString(const BoundingBox& b) {
  return "[" + std::to_string(b.x_min) + "," + std::to_string(b.y_min) + "," +
         std::to_string(b.x_max) + "," + std::to_string(b.y_max) + "]";
}

}  // namespace

void ValidateBox(const BoundingBox& box, std::int64_t width, std::int64_t height) {
  if (box.x_min >= box.x_max || box.y_min >= box.y_max) {
    throw Error(ErrorCode::kDegenerateBox, "box " + BoxString(box) + " is empty");
  }
  if (box.x_min < 0 || box.y_min < 0 || box.x_max > width || box.y_max > height) {
    throw Error(ErrorCode::kBoxOutOfBounds,
                "box " + BoxString(box) + " exceeds image " +
                    std::to_string(width) + "x" + std::to_string(height));
  }
}

GroundTruthMask MaskFromBoxes(std::span<const BoundingBox> boxes,
                              std::int64_t width, std::int64_t height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidShape, "image dimensions must be >= 1");
  }
  Tensor2D values({static_cast<std::size_t>(height), static_cast<std::size_t>(width)},
                  DType::kFloat32);
  for (const BoundingBox& box : boxes) {
    ValidateBox(box, width, height);
    for (std::int64_t y = box.y_min; y < box.y_max; ++y) {
      for (std::int64_t x = box.x_min; x < box.x_max; ++x) {
        values(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = 1.0;
      }
    }
  }
  return GroundTruthMask(std::move(values));
}

RmaScore Rma(const Heatmap& heatmap, const GroundTruthMask& mask) {
  RequireSameShape(heatmap, mask);
  const auto h = heatmap.values().data();
  const auto m = mask.values().data();
  double inside = 0.0;
  double outside = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (m[i] != 0.0) {
      inside += h[i];
    } else {
      outside += h[i];
    }
  }
  if (inside == 0.0 && outside == 0.0) return {0.0, true};
  if (inside == 0.0) return {0.0, false};
  return {1.0 / (1.0 + outside / inside), false};
}

Heatmap AlignToMask(const Heatmap& heatmap, const GroundTruthMask& mask) {
  if (heatmap.values().shape() == mask.values().shape()) return heatmap;
  Tensor2D resized =
      ResampleBilinear(heatmap.values(), mask.height(), mask.width());
  for (double& v : resized.mutable_data()) v = std::max(v, 0.0);
  return Heatmap(std::move(resized));
}

double Iou(const Heatmap& heatmap, const GroundTruthMask& mask, double tau) {
  RequireSameShape(heatmap, mask);
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "iou tau must lie in [0, 1]");
  }
  const auto h = heatmap.values().data();
  const auto m = mask.values().data();
  const double peak = *std::max_element(h.begin(), h.end());
  const double cutoff = tau * peak;
  std::size_t intersection = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const bool fg = h[i] >= cutoff;
    const bool gt = m[i] != 0.0;
    intersection += (fg && gt) ? 1 : 0;
    uni += (fg || gt) ? 1 : 0;
  }
  if (uni == 0) return 0.0;
  return static_cast<double>(intersection) / static_cast<double>(uni);
}

std::string_view QuadrantName(Quadrant q) {
  switch (q) {
    case Quadrant::kRR: return "RR";
    case Quadrant::kRW: return "RW";
    case Quadrant::kWR: return "WR";
    case Quadrant::kWW: return "WW";
  }
  return "??";
}

Quadrant ParseQuadrant(std::string_view name) {
  if (name == "RR") return Quadrant::kRR;
  if (name == "RW") return Quadrant::kRW;
  if (name == "WR") return Quadrant::kWR;
  if (name == "WW") return Quadrant::kWW;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown quadrant '" + std::string(name) + "'");
}

Quadrant ClassifyQuadrant(bool prediction_correct, double rma_score, double theta) {
  const bool valid = rma_score >= theta;
  if (prediction_correct) return valid ? Quadrant::kRR : Quadrant::kRW;
  return valid ? Quadrant::kWR : Quadrant::kWW;
}

void QuadrantTally::Add(Quadrant q) {
  switch (q) {
    case Quadrant::kRR: ++rr; break;
    case Quadrant::kRW: ++rw; break;
    case Quadrant::kWR: ++wr; break;
    case Quadrant::kWW: ++ww; break;
  }
}

QuadrantTally& QuadrantTally::operator+=(const QuadrantTally& other) {
  rr += other.rr;
  rw += other.rw;
  wr += other.wr;
  ww += other.ww;
  return *this;
}

QuadrantTally Tally(std::span<const ScoredPrediction> records, double theta) {
  QuadrantTally t;
  for (const ScoredPrediction& r : records) {
    t.Add(ClassifyQuadrant(r.prediction_correct, r.rma, theta));
  }
  return t;
}

std::optional<double> PredictionTrustworthiness(const QuadrantTally& t) {
  const std::uint64_t denom = t.rr + t.rw;
  if (denom == 0) return std::nullopt;
  return static_cast<double>(t.rr) / static_cast<double>(denom);
}

std::optional<double> InferenceReliability(const QuadrantTally& t) {
  const std::uint64_t denom = t.rr + t.wr;
  if (denom == 0) return std::nullopt;
  return static_cast<double>(t.rr) / static_cast<double>(denom);
}

EvalSummary Summarize(const QuadrantTally& t) {
  const std::uint64_t n = t.total();
  if (n == 0) throw Error(ErrorCode::kEmptyCohort, "no samples to summarize");
  EvalSummary s;
  s.tally = t;
  s.n = n;
  s.accuracy = static_cast<double>(t.rr + t.rw) / static_cast<double>(n);
  s.valid_evidence_rate = static_cast<double>(t.rr + t.wr) / static_cast<double>(n);
  s.pt = PredictionTrustworthiness(t);
  s.ir = InferenceReliability(t);
  return s;
}

}  // namespace rateval
