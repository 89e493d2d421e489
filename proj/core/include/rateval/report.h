#ifndef RATEVAL_REPORT_H_
#define RATEVAL_REPORT_H_

#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rateval/analysis.h"

namespace rateval {

inline constexpr std::string_view kReportSchema = "rationality-eval/1";

std::string_view Version();

enum class ReportFormat { kJson, kCsv, kSvg };

ReportFormat ParseReportFormat(std::string_view name);
std::string_view ReportFormatExtension(ReportFormat format);

// Run settings recorded in the JSON report's provenance block. Nothing
// machine- or path-specific goes in here so reports stay byte-stable.
struct ReportConfig {
  double theta = kDefaultTheta;
  std::string attribution = "eq2";
  std::string layer_mode = "last";
  std::optional<double> iou_tau;
};

// Decimal rendering used in every report: 9 significant digits, shortest
// form ("%.9g"), round-half-even on the exact binary value.
std::string FormatSig9(double value);

// Group table in the requested format. Throws kEmptyReport when there are
// no groups.
//   csv: method,corruption,severity,n,rr,rw,wr,ww,accuracy,pt,ir,
//        valid_evidence_rate (undefined metrics are empty cells)
//   json: schema, provenance, groups and sweeps; undefined metrics are null
//         with a reason under "undefined"
//   svg: one line chart per metric per corruption, severity on the x axis,
//        one line per method
std::string EmitReport(const GroupSummaries& summaries,
                       std::span<const SweepSeries> sweeps, ReportFormat format,
                       const ReportConfig& config);

// Sweep table: same columns as the group CSV, one row per series point, in
// series order (the clean point repeats in each of a method's series).
std::string EmitSweepCsv(std::span<const SweepSeries> sweeps);

// Per-sample scores as JSONL, one line per sample in the given order:
// {"sample_id", "prediction_correct", "rma", "quadrant", "flags", "iou"?,
//  "tags"}. The quadrant is computed at `theta`.
std::string SerializeScores(std::span<const SampleScore> scores, double theta);
std::vector<SampleScore> ParseScores(std::istream& in);

}  // namespace rateval

#endif  // RATEVAL_REPORT_H_
