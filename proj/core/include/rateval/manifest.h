#ifndef RATEVAL_MANIFEST_H_
#define RATEVAL_MANIFEST_H_

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rateval/attribution.h"
#include "rateval/metrics.h"

namespace rateval {

// Evaluation manifest: JSON Lines, one sample per line.
//
//   {"sample_id": "a", "true_class": 3, "pred_class": 3,
//    "heatmap_path": "heatmaps/a.npy",              <- or "capture_paths"
//    "mask_path": "masks/a.npy",                    <- or "bboxes" + dims
//    "tags": {"method": "ZS", "corruption": "blur", "severity": "2"}}
//
// capture_paths = {"attention": [per-layer paths], "gradient": [...],
//                  "layers": [block indices], "cls_index": 0,
//                  "non_image_tokens": [0], "grid": [gh, gw],
//                  "target_class": 3}
// bbox ground truth = "bboxes": [[x_min, y_min, x_max, y_max], ...],
//                     "image_width": W, "image_height": H
//
// Relative paths resolve against the manifest's directory.

struct HeatmapEvidence {
  std::filesystem::path heatmap_path;
};

struct CaptureEvidence {
  std::vector<std::filesystem::path> attention_paths;  // one per layer
  std::vector<std::filesystem::path> gradient_paths;   // one per layer
  std::vector<int> layers;  // block index of each path pair, informational
  std::size_t cls_index = 0;
  std::vector<std::size_t> non_image_tokens;
  PatchGrid grid;
  std::optional<int> target_class;
};

using Evidence = std::variant<HeatmapEvidence, CaptureEvidence>;

struct MaskGroundTruth {
  std::filesystem::path mask_path;
};

struct BoxGroundTruth {
  std::vector<BoundingBox> boxes;
  std::int64_t image_width = 0;
  std::int64_t image_height = 0;
};

using GroundTruth = std::variant<MaskGroundTruth, BoxGroundTruth>;

struct SampleEntry {
  std::string sample_id;
  int true_class = 0;
  int pred_class = 0;
  Evidence evidence;
  GroundTruth ground_truth;
  std::map<std::string, std::string> tags;
  std::size_t line = 0;  // 1-based source line, 0 when built in memory

  bool prediction_correct() const { return true_class == pred_class; }
};

struct Manifest {
  std::vector<SampleEntry> entries;  // file order
};

// Parses JSONL from `in`. Blank lines are skipped. Relative paths are made
// absolute against `base_dir`. Throws Error with the 1-based line number in
// the message (kParseError, kMissingField, kInvalidField,
// kDuplicateSampleId, kConflictingEvidence, kConflictingGroundTruth,
// kDegenerateBox, kBoxOutOfBounds).
Manifest ParseManifest(std::istream& in, const std::filesystem::path& base_dir);
Manifest LoadManifest(const std::filesystem::path& path);

// One JSON object without trailing newline; paths are written relative to
// `base_dir` when they live under it.
std::string SerializeEntry(const SampleEntry& entry,
                           const std::filesystem::path& base_dir);
void WriteManifest(const Manifest& manifest, const std::filesystem::path& path);

}  // namespace rateval

#endif  // RATEVAL_MANIFEST_H_
