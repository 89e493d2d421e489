#include "rateval/pipeline.h"

#include <algorithm>

#include "rateval/npy.h"
#include "rateval/parallel.h"

namespace rateval {

GroundTruthMask LoadGroundTruth(const SampleEntry& entry) {
  if (const auto* m = std::get_if<MaskGroundTruth>(&entry.ground_truth)) {
    Tensor2D values = ReadNpy2D(m->mask_path);
    try {
      return GroundTruthMask(std::move(values));
    } catch (const Error& e) {
      throw Error(e.code(), m->mask_path.string() + ": " + e.detail());
    }
  }
  const auto& b = std::get<BoxGroundTruth>(entry.ground_truth);
  return MaskFromBoxes(b.boxes, b.image_width, b.image_height);
}

ImageSize GroundTruthSize(const SampleEntry& entry) {
  if (const auto* m = std::get_if<MaskGroundTruth>(&entry.ground_truth)) {
    const NpyHeader header = ReadNpyHeader(m->mask_path);
    if (header.shape.size() != 2) {
      throw Error(ErrorCode::kUnsupportedRank,
                  m->mask_path.string() + ": mask must be 2-D, found shape " +
                      ShapeString(header.shape));
    }
    return {header.shape[0], header.shape[1]};
  }
  const auto& b = std::get<BoxGroundTruth>(entry.ground_truth);
  return {static_cast<std::size_t>(b.image_height),
          static_cast<std::size_t>(b.image_width)};
}

AttentionCapture LoadCapture(const SampleEntry& entry) {
  const auto* c = std::get_if<CaptureEvidence>(&entry.evidence);
  if (c == nullptr) {
    throw Error(ErrorCode::kMissingField, "entry has no capture_paths");
  }
  AttentionCapture capture;
  capture.target_class = c->target_class.value_or(entry.true_class);
  capture.cls_index = c->cls_index;
  capture.non_image_tokens = c->non_image_tokens;
  capture.grid = c->grid;
  for (std::size_t l = 0; l < c->attention_paths.size(); ++l) {
    capture.layers.push_back(
        {ReadNpy3D(c->attention_paths[l]), ReadNpy3D(c->gradient_paths[l])});
  }
  return capture;
}

Heatmap ResolveHeatmap(const SampleEntry& entry, const PipelineConfig& config,
                       std::size_t height, std::size_t width) {
  if (const auto* h = std::get_if<HeatmapEvidence>(&entry.evidence)) {
    Tensor2D values = ReadNpy2D(h->heatmap_path);
    try {
      return Heatmap(std::move(values));
    } catch (const Error& e) {
      throw Error(e.code(), h->heatmap_path.string() + ": " + e.detail());
    }
  }
  return ComputeHeatmap(LoadCapture(entry), config.attribution,
                        config.layer_mode, height, width);
}

SampleScore ScoreSample(const SampleEntry& entry, const PipelineConfig& config) {
  return WithSampleContext(entry, [&] {
    const GroundTruthMask mask = LoadGroundTruth(entry);
    const Heatmap heatmap =
        AlignToMask(ResolveHeatmap(entry, config, mask.height(), mask.width()), mask);
    const RmaScore rma = Rma(heatmap, mask);

    SampleScore s;
    s.sample_id = entry.sample_id;
    s.prediction_correct = entry.prediction_correct();
    s.rma = rma.value;
    s.degenerate_heatmap = rma.degenerate_heatmap;
    if (config.iou_tau) s.iou = Iou(heatmap, mask, *config.iou_tau);
    s.tags = entry.tags;
    return s;
  });
}

std::vector<SampleScore> ScoreManifest(const Manifest& manifest,
                                       const PipelineConfig& config) {
  std::vector<const SampleEntry*> order;
  order.reserve(manifest.entries.size());
  for (const SampleEntry& e : manifest.entries) order.push_back(&e);
  std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
    return a->sample_id < b->sample_id;
  });

  std::vector<SampleScore> scores(order.size());
  ParallelFor(order.size(), config.workers,
              [&](std::size_t i) { scores[i] = ScoreSample(*order[i], config); });
  return scores;
}

}  // namespace rateval
