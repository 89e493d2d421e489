#ifndef RATEVAL_METRICS_H_
#define RATEVAL_METRICS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "rateval/maps.h"

namespace rateval {

// Default RMA threshold: a score at or above it counts as valid evidence.
inline constexpr double kDefaultTheta = 0.5;
// Default IoU binarization cutoff as a fraction of the heatmap maximum.
inline constexpr double kDefaultIouTau = 0.5;

// Half-open pixel box: x_min <= x < x_max, y_min <= y < y_max.
struct BoundingBox {
  std::int64_t x_min = 0;
  std::int64_t y_min = 0;
  std::int64_t x_max = 0;
  std::int64_t y_max = 0;
};

// Throws kDegenerateBox / kBoxOutOfBounds when `box` is not a valid box in
// a width x height image.
void ValidateBox(const BoundingBox& box, std::int64_t width, std::int64_t height);

// Union of the boxes rasterized into a height x width mask.
GroundTruthMask MaskFromBoxes(std::span<const BoundingBox> boxes,
                              std::int64_t width, std::int64_t height);

struct RmaScore {
  double value = 0.0;
  // Set when the heatmap has no mass at all. `value` is then 0 and the
  // sample never counts as valid evidence.
  bool degenerate_heatmap = false;
};

// Relevant Mass Accuracy: the fraction of heatmap mass that falls inside the
// mask. Mass inside and outside the mask is accumulated separately in 64-bit
// row-major order and combined as 1 / (1 + outside / inside), which keeps the
// result exactly 1 when no mass is outside, exactly 0 when none is inside,
// and monotone in the inside mass. Throws kShapeMismatch.
RmaScore Rma(const Heatmap& heatmap, const GroundTruthMask& mask);

// Brings the heatmap onto the mask grid (bilinear, corner-anchored) when the
// resolutions differ; returns it unchanged otherwise.
Heatmap AlignToMask(const Heatmap& heatmap, const GroundTruthMask& mask);

// IoU between the heatmap binarized at tau * max(H) (pixels >= cutoff are
// foreground) and the mask. An empty union scores 0.
double Iou(const Heatmap& heatmap, const GroundTruthMask& mask,
           double tau = kDefaultIouTau);

enum class Quadrant { kRR, kRW, kWR, kWW };

std::string_view QuadrantName(Quadrant q);
Quadrant ParseQuadrant(std::string_view name);

// First letter: prediction right/wrong. Second letter: evidence valid
// (rma >= theta, inclusive) or not.
Quadrant ClassifyQuadrant(bool prediction_correct, double rma_score,
                          double theta = kDefaultTheta);

struct QuadrantTally {
  std::uint64_t rr = 0;
  std::uint64_t rw = 0;
  std::uint64_t wr = 0;
  std::uint64_t ww = 0;

  std::uint64_t total() const { return rr + rw + wr + ww; }
  void Add(Quadrant q);
  QuadrantTally& operator+=(const QuadrantTally& other);
  friend bool operator==(const QuadrantTally&, const QuadrantTally&) = default;
};

struct ScoredPrediction {
  bool prediction_correct = false;
  double rma = 0.0;
};

QuadrantTally Tally(std::span<const ScoredPrediction> records,
                    double theta = kDefaultTheta);

// Prediction Trustworthiness RR / (RR + RW); nullopt when RR + RW == 0.
std::optional<double> PredictionTrustworthiness(const QuadrantTally& t);
// Inference Reliability RR / (RR + WR); nullopt when RR + WR == 0.
std::optional<double> InferenceReliability(const QuadrantTally& t);

struct EvalSummary {
  QuadrantTally tally;
  std::uint64_t n = 0;
  double accuracy = 0.0;             // (rr + rw) / n
  double valid_evidence_rate = 0.0;  // (rr + wr) / n
  std::optional<double> pt;
  std::optional<double> ir;
};

// Throws kEmptyCohort when the tally is empty.
EvalSummary Summarize(const QuadrantTally& t);

}  // namespace rateval

#endif  // RATEVAL_METRICS_H_
