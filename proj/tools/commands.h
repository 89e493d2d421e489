#ifndef RATEVAL_TOOLS_COMMANDS_H_
#define RATEVAL_TOOLS_COMMANDS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

#include "rateval/attribution.h"
#include "rateval/metrics.h"
#include "rateval/report.h"

namespace rateval::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitEmptyCohort = 3;

struct RunConfig {
  std::filesystem::path manifest;
  std::filesystem::path scores;
  std::filesystem::path spec;
  std::filesystem::path out = ".";
  double theta = kDefaultTheta;
  AttributionMethod attribution = AttributionMethod::kAttentionGradient;
  LayerMode layer_mode = LayerMode::kLast;
  std::optional<double> iou_tau;
  std::vector<ReportFormat> formats;  // empty = command default
  unsigned workers = 1;
  std::optional<std::uint64_t> seed;
};

// theta in [0, 1], tau in [0, 1], workers >= 1. Throws kInvalidArgument.
void ValidateRunConfig(const RunConfig& config);

// Applies keys from a JSON config file onto `config`. Keys mirror the flag
// names with underscores: manifest, scores, spec, out, theta, attribution,
// layer_mode, iou_tau, format (string or array), workers, seed.
void ApplyConfigFile(const std::filesystem::path& path, RunConfig& config);

std::vector<ReportFormat> ParseFormatList(std::string_view list);

int CmdAttribute(const RunConfig& config, std::ostream& out);
int CmdEvaluate(const RunConfig& config, std::ostream& out);
int CmdSweep(const RunConfig& config, std::ostream& out);
int CmdReport(const RunConfig& config, std::ostream& out);
int CmdSynth(const RunConfig& config, std::ostream& out);

// Full command line entry point; library errors are printed to `err` and
// mapped onto the exit codes above.
int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rateval::cli

#endif  // RATEVAL_TOOLS_COMMANDS_H_
