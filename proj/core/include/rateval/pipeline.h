#ifndef RATEVAL_PIPELINE_H_
#define RATEVAL_PIPELINE_H_

#include <cstddef>
#include <optional>
#include <vector>

#include "rateval/analysis.h"
#include "rateval/attribution.h"
#include "rateval/manifest.h"

namespace rateval {

// Per-sample scoring stage shared by the `attribute`, `evaluate` and `sweep`
// commands: resolve evidence and ground truth from a manifest entry, score
// RMA (and optionally IoU), and fan the work out over a thread pool.

struct PipelineConfig {
  double theta = kDefaultTheta;
  AttributionMethod attribution = AttributionMethod::kAttentionGradient;
  LayerMode layer_mode = LayerMode::kLast;
  std::optional<double> iou_tau;
  unsigned workers = 1;
};

struct ImageSize {
  std::size_t height = 0;
  std::size_t width = 0;
};

// Mask file (must be binary) or the union of the entry's boxes.
GroundTruthMask LoadGroundTruth(const SampleEntry& entry);

// Height and width of the entry's ground truth without rasterizing it.
ImageSize GroundTruthSize(const SampleEntry& entry);

AttentionCapture LoadCapture(const SampleEntry& entry);

// Reads heatmap evidence from disk or computes it from the capture at the
// requested pixel size.
Heatmap ResolveHeatmap(const SampleEntry& entry, const PipelineConfig& config,
                       std::size_t height, std::size_t width);

// Scores one entry. The heatmap is resampled onto the mask grid when the
// resolutions differ. Errors are rethrown with the sample_id and manifest
// line in the message.
SampleScore ScoreSample(const SampleEntry& entry, const PipelineConfig& config);

// Scores every entry on config.workers threads; the result is sorted by
// sample_id.
std::vector<SampleScore> ScoreManifest(const Manifest& manifest,
                                       const PipelineConfig& config);

// Wraps `fn`, prefixing any Error with the entry's sample_id and line.
template <typename Fn>
auto WithSampleContext(const SampleEntry& entry, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    std::string where = "sample '" + entry.sample_id + "'";
    if (entry.line > 0) where += " (manifest line " + std::to_string(entry.line) + ")";
    throw Error(e.code(), where + ": " + e.detail());
  }
}

}  // namespace rateval

#endif  // RATEVAL_PIPELINE_H_
