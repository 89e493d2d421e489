#ifndef RATEVAL_SYNTH_H_
#define RATEVAL_SYNTH_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "rateval/analysis.h"
#include "rateval/manifest.h"
#include "rateval/metrics.h"

namespace rateval {

// SplitMix64 (Steele, Lea & Flood): state += 0x9E3779B97F4A7C15, then
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   z ^= z >> 31
// Uniform01 uses the top 53 bits; UniformIndex(n) is the high word of the
// 128-bit product Next() * n. Any language can reproduce a cohort from these
// three rules and the generation order in GeneratePlantedCohort.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t Next();
  double Uniform01();                                 // [0, 1)
  double Uniform(double lo, double hi);               // [lo, hi)
  std::uint64_t UniformIndex(std::uint64_t n);        // [0, n)

 private:
  std::uint64_t state_;
};

// Heatmap whose RMA against `mask` equals `target` to ~1e-15: mass `target`
// spread over in-mask pixels and 1 - target over the rest, each region
// jittered by per-pixel weights in [0.5, 1.5) and renormalized. Throws
// kInfeasibleTarget when the target needs a region the mask lacks, and
// kInvalidArgument when target is outside [0, 1].
Heatmap GenerateHeatmapWithRma(double target, const GroundTruthMask& mask,
                               std::uint64_t seed);

// sum(H * M) / sum(H) as a plain double loop with no code shared with Rma().
// Used as the independent oracle in tests. Throws kShapeMismatch, and
// kInvalidHeatmap when sum(H) is 0.
double BruteForceRma(const Heatmap& heatmap, const GroundTruthMask& mask);

enum class GroundTruthStyle { kMask, kBoxes, kMixed };

struct PlantedGroup {
  GroupKey key;
  QuadrantTally tally;
};

struct PlantedCohortSpec {
  std::vector<PlantedGroup> groups;
  std::size_t width = 16;
  std::size_t height = 16;
  std::uint64_t seed = 0;
  int num_classes = 1000;
  GroundTruthStyle ground_truth = GroundTruthStyle::kMixed;
};

// Parses the JSON cohort description used by `rateval synth`:
//   {"seed": 7, "width": 16, "height": 16, "num_classes": 1000,
//    "ground_truth": "mixed" | "mask" | "bbox",
//    "groups": [{"method": "ZS", "corruption": "", "severity": 0,
//                "tally": {"rr": 1, "rw": 1, "wr": 1, "ww": 1}}],
//    "grid": {"methods": [...], "corruptions": [...], "severities": [...],
//             "tally": {...}, "include_clean": true}}
// "groups" and "grid" may both be present; every GroupKey must be unique.
PlantedCohortSpec ParsePlantedCohortSpec(std::string_view json_text);

// Samples whose evaluation at theta = 0.5 reproduces the planted tallies:
// valid-evidence samples draw their RMA from [0.55, 1), invalid ones from
// [0, 0.45), correct ones get pred_class == true_class.
// Writes masks/*.npy, heatmaps/*.npy and manifest.jsonl under `out_dir`
// and returns the manifest. Equal specs produce byte-identical files.
Manifest GeneratePlantedCohort(const PlantedCohortSpec& spec,
                               const std::filesystem::path& out_dir);

}  // namespace rateval

#endif  // RATEVAL_SYNTH_H_
