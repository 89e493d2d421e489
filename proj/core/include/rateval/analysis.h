#ifndef RATEVAL_ANALYSIS_H_
#define RATEVAL_ANALYSIS_H_

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rateval/metrics.h"

namespace rateval {

// One evaluated sample as it leaves the scoring stage.
struct SampleScore {
  std::string sample_id;
  bool prediction_correct = false;
  double rma = 0.0;
  bool degenerate_heatmap = false;
  std::optional<double> iou;
  std::map<std::string, std::string> tags;
};

// A degenerate heatmap never counts as valid evidence, whatever theta is.
Quadrant ClassifySample(const SampleScore& s, double theta);

// Grouping key for method comparisons and corruption sweeps. An empty
// corruption denotes clean data and always has severity 0; a corrupted group
// always has severity >= 1.
struct GroupKey {
  std::string method;
  std::string corruption;
  std::uint32_t severity = 0;

  auto operator<=>(const GroupKey&) const = default;
  bool operator==(const GroupKey&) const = default;
};

// Reads the "method", "corruption" and "severity" tags. Throws kMissingTag
// (no method, or a corruption without a severity) or kInvalidTag.
GroupKey GroupKeyFromTags(const std::map<std::string, std::string>& tags);

using GroupSummaries = std::map<GroupKey, EvalSummary>;

// Partitions records by GroupKey and summarizes each group. Records are
// processed in sample_id order so the result does not depend on input order.
GroupSummaries GroupAndSummarize(std::span<const SampleScore> records,
                                 double theta = kDefaultTheta);

struct SweepPoint {
  std::uint32_t severity = 0;
  EvalSummary summary;
};

struct SweepSeries {
  std::string method;
  std::string corruption;  // empty for a clean-only series
  std::vector<SweepPoint> points;  // strictly increasing severity
};

// One series per (method, corruption), severity-sorted, with the method's
// clean group prepended as the severity-0 point when present. A method with
// only clean data yields a single one-point series.
std::vector<SweepSeries> BuildSweeps(const GroupSummaries& summaries);

}  // namespace rateval

#endif  // RATEVAL_ANALYSIS_H_
