#include "commands.h"

#include <fmt/format.h>

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "rateval/analysis.h"
#include "rateval/manifest.h"
#include "rateval/npy.h"
#include "rateval/parallel.h"
#include "rateval/pipeline.h"
#include "rateval/synth.h"

namespace rateval::cli {
namespace {

void EnsureDir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoFailure, dir.string() + ": " + ec.message());
}

void RequirePath(const std::filesystem::path& p, const char* flag) {
  if (p.empty()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(flag) + " is required");
  }
}

std::string ReadText(const std::filesystem::path& path) {
  const std::vector<std::byte> bytes = ReadFileBytes(path);
  return std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

// File-system-safe stem for a sample_id. Ids that needed rewriting get a
// hash suffix so two ids never share a stem.
std::string SafeStem(const std::string& id) {
  std::string stem = id;
  bool rewritten = false;
  for (char& c : stem) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' &&
        c != '.') {
      c = '_';
      rewritten = true;
    }
  }
  if (stem.empty() || stem.front() == '.') rewritten = true;
  if (rewritten) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : id) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    stem = fmt::format("{}-{:016x}", stem, h);
  }
  return stem;
}

ReportConfig ToReportConfig(const RunConfig& c) {
  return ReportConfig{c.theta, std::string(AttributionMethodName(c.attribution)),
                      std::string(LayerModeName(c.layer_mode)), c.iou_tau};
}

PipelineConfig ToPipelineConfig(const RunConfig& c) {
  return PipelineConfig{c.theta, c.attribution, c.layer_mode, c.iou_tau, c.workers};
}

std::vector<SampleScore> LoadOrScore(const RunConfig& config) {
  if (!config.scores.empty()) {
    std::ifstream in(config.scores);
    if (!in) throw Error(ErrorCode::kIoFailure, config.scores.string() + ": cannot open");
    return ParseScores(in);
  }
  RequirePath(config.manifest, "--manifest or --scores");
  return ScoreManifest(LoadManifest(config.manifest), ToPipelineConfig(config));
}

std::string MetricCell(const std::optional<double>& v) {
  return v ? fmt::format("{:.4f}", *v) : std::string("undef");
}

void PrintSummaries(const GroupSummaries& summaries, std::ostream& out) {
  out << fmt::format("{:<12} {:<20} {:>3} {:>7} {:>8} {:>8} {:>8} {:>8}\n", "method",
                     "corruption", "sev", "n", "acc", "PT", "IR", "valid");
  for (const auto& [key, s] : summaries) {
    out << fmt::format("{:<12} {:<20} {:>3} {:>7} {:>8.4f} {:>8} {:>8} {:>8.4f}\n",
                       key.method, key.corruption.empty() ? "-" : key.corruption,
                       key.severity, s.n, s.accuracy, MetricCell(s.pt),
                       MetricCell(s.ir), s.valid_evidence_rate);
  }
}

int Summarized(const std::vector<SampleScore>& scores, const RunConfig& config,
               std::ostream& out, GroupSummaries& summaries) {
  if (scores.empty()) {
    out << "empty cohort: nothing to evaluate\n";
    return kExitEmptyCohort;
  }
  summaries = GroupAndSummarize(scores, config.theta);
  return kExitOk;
}

void WriteReports(const GroupSummaries& summaries, const std::vector<SweepSeries>& sweeps,
                  const RunConfig& config, std::string_view stem,
                  const std::vector<ReportFormat>& formats, std::ostream& out) {
  for (ReportFormat f : formats) {
    const std::filesystem::path path =
        config.out / fmt::format("{}.{}", stem, ReportFormatExtension(f));
    WriteFileAtomic(path, EmitReport(summaries, sweeps, f, ToReportConfig(config)));
    out << "wrote " << path.string() << "\n";
  }
}

}  // namespace

void ValidateRunConfig(const RunConfig& config) {
  if (!(config.theta >= 0.0 && config.theta <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "--theta must lie in [0, 1]");
  }
  if (config.iou_tau && !(*config.iou_tau >= 0.0 && *config.iou_tau <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "--iou-tau must lie in [0, 1]");
  }
  if (config.workers < 1) {
    throw Error(ErrorCode::kInvalidArgument, "--workers must be >= 1");
  }
}

std::vector<ReportFormat> ParseFormatList(std::string_view list) {
  std::vector<ReportFormat> formats;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t comma = std::min(list.find(',', start), list.size());
    const std::string_view item = list.substr(start, comma - start);
    if (!item.empty()) {
      const ReportFormat f = ParseReportFormat(item);
      if (std::find(formats.begin(), formats.end(), f) == formats.end()) {
        formats.push_back(f);
      }
    }
    start = comma + 1;
  }
  return formats;
}

void ApplyConfigFile(const std::filesystem::path& path, RunConfig& config) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ReadText(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  if (!j.is_object()) {
    throw Error(ErrorCode::kParseError, path.string() + ": config must be a JSON object");
  }
  // Relative paths in the config file resolve against its directory.
  const std::filesystem::path base = std::filesystem::absolute(path).parent_path();
  auto path_key = [&](const char* key, std::filesystem::path& dst) {
    if (j.contains(key)) {
      std::filesystem::path p = j[key].get<std::string>();
      dst = p.is_relative() ? base / p : p;
    }
  };
  try {
    path_key("manifest", config.manifest);
    path_key("scores", config.scores);
    path_key("spec", config.spec);
    path_key("out", config.out);
    if (j.contains("theta")) config.theta = j["theta"].get<double>();
    if (j.contains("attribution")) {
      config.attribution = ParseAttributionMethod(j["attribution"].get<std::string>());
    }
    if (j.contains("layer_mode")) {
      config.layer_mode = ParseLayerMode(j["layer_mode"].get<std::string>());
    }
    if (j.contains("iou_tau") && !j["iou_tau"].is_null()) {
      config.iou_tau = j["iou_tau"].get<double>();
    }
    if (j.contains("format")) {
      const auto& f = j["format"];
      if (f.is_array()) {
        config.formats.clear();
        for (const auto& item : f) config.formats.push_back(ParseReportFormat(item.get<std::string>()));
      } else {
        config.formats = ParseFormatList(f.get<std::string>());
      }
    }
    if (j.contains("workers")) config.workers = j["workers"].get<unsigned>();
    if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidField, path.string() + ": " + e.what());
  }
}

int CmdAttribute(const RunConfig& config, std::ostream& out) {
  RequirePath(config.manifest, "--manifest");
  const Manifest input = LoadManifest(config.manifest);
  const std::filesystem::path heatmap_dir = config.out / "heatmaps";
  EnsureDir(heatmap_dir);
  const PipelineConfig pipeline = ToPipelineConfig(config);

  Manifest output = input;
  std::size_t computed = 0;
  for (const SampleEntry& e : input.entries) {
    computed += std::holds_alternative<CaptureEvidence>(e.evidence) ? 1 : 0;
  }
  ParallelFor(input.entries.size(), config.workers, [&](std::size_t i) {
    const SampleEntry& entry = input.entries[i];
    if (!std::holds_alternative<CaptureEvidence>(entry.evidence)) return;
    WithSampleContext(entry, [&] {
      const ImageSize size = GroundTruthSize(entry);
      const Heatmap heatmap = ResolveHeatmap(entry, pipeline, size.height, size.width);
      const std::filesystem::path path =
          std::filesystem::absolute(heatmap_dir / (SafeStem(entry.sample_id) + ".npy"))
              .lexically_normal();
      WriteNpy(heatmap.values(), path);
      output.entries[i].evidence = HeatmapEvidence{path};
    });
  });
  const std::filesystem::path manifest_path = config.out / "manifest.jsonl";
  WriteManifest(output, manifest_path);
  out << fmt::format("attributed {} of {} samples ({}, layers={}); wrote {}\n",
                     computed, input.entries.size(),
                     AttributionMethodName(config.attribution),
                     LayerModeName(config.layer_mode), manifest_path.string());
  return kExitOk;
}

int CmdEvaluate(const RunConfig& config, std::ostream& out) {
  RequirePath(config.manifest, "--manifest");
  const std::vector<SampleScore> scores =
      ScoreManifest(LoadManifest(config.manifest), ToPipelineConfig(config));
  EnsureDir(config.out);
  const std::filesystem::path scores_path = config.out / "scores.jsonl";
  WriteFileAtomic(scores_path, SerializeScores(scores, config.theta));

  GroupSummaries summaries;
  if (int rc = Summarized(scores, config, out, summaries); rc != kExitOk) return rc;
  const std::vector<SweepSeries> sweeps = BuildSweeps(summaries);
  const std::vector<ReportFormat> formats =
      config.formats.empty()
          ? std::vector<ReportFormat>{ReportFormat::kJson, ReportFormat::kCsv}
          : config.formats;
  PrintSummaries(summaries, out);
  out << "wrote " << scores_path.string() << "\n";
  WriteReports(summaries, sweeps, config, "report", formats, out);
  return kExitOk;
}

int CmdSweep(const RunConfig& config, std::ostream& out) {
  const std::vector<SampleScore> scores = LoadOrScore(config);
  GroupSummaries summaries;
  if (int rc = Summarized(scores, config, out, summaries); rc != kExitOk) return rc;
  const std::vector<SweepSeries> sweeps = BuildSweeps(summaries);
  EnsureDir(config.out);
  const std::vector<ReportFormat> formats =
      config.formats.empty()
          ? std::vector<ReportFormat>{ReportFormat::kCsv, ReportFormat::kSvg}
          : config.formats;
  for (ReportFormat f : formats) {
    const std::filesystem::path path =
        config.out / fmt::format("sweeps.{}", ReportFormatExtension(f));
    WriteFileAtomic(path, f == ReportFormat::kCsv
                              ? EmitSweepCsv(sweeps)
                              : EmitReport(summaries, sweeps, f, ToReportConfig(config)));
    out << "wrote " << path.string() << "\n";
  }
  out << fmt::format("{} series\n", sweeps.size());
  return kExitOk;
}

int CmdReport(const RunConfig& config, std::ostream& out) {
  RequirePath(config.scores, "--scores");
  const std::vector<SampleScore> scores = LoadOrScore(config);
  GroupSummaries summaries;
  if (int rc = Summarized(scores, config, out, summaries); rc != kExitOk) return rc;
  EnsureDir(config.out);
  const std::vector<ReportFormat> formats =
      config.formats.empty()
          ? std::vector<ReportFormat>{ReportFormat::kJson, ReportFormat::kCsv,
                                      ReportFormat::kSvg}
          : config.formats;
  PrintSummaries(summaries, out);
  WriteReports(summaries, BuildSweeps(summaries), config, "report", formats, out);
  return kExitOk;
}

int CmdSynth(const RunConfig& config, std::ostream& out) {
  RequirePath(config.spec, "--spec");
  PlantedCohortSpec spec = ParsePlantedCohortSpec(ReadText(config.spec));
  if (config.seed) spec.seed = *config.seed;
  const Manifest manifest = GeneratePlantedCohort(spec, config.out);
  out << fmt::format("generated {} samples in {} groups under {}\n",
                     manifest.entries.size(), spec.groups.size(),
                     config.out.string());
  return kExitOk;
}

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"rateval: prediction-rationality evaluation of image classifiers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(Version()));

  struct Flags {
    std::optional<std::string> config;
    std::optional<std::string> manifest, scores, spec, out;
    std::optional<double> theta, iou_tau;
    std::optional<std::string> attribution, layer_mode;
    std::vector<std::string> formats;
    std::optional<unsigned> workers;
    std::optional<std::uint64_t> seed;
  } flags;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON config file (flags win on conflict)");
    sub->add_option("--out", flags.out, "Output directory");
    sub->add_option("--workers", flags.workers, "Worker threads (>= 1)");
  };
  auto add_eval = [&](CLI::App* sub) {
    sub->add_option("--theta", flags.theta, "RMA threshold for valid evidence (default 0.5)");
    sub->add_option("--format", flags.formats, "Report formats: json, csv, svg")
        ->delimiter(',');
  };
  auto add_attr = [&](CLI::App* sub) {
    sub->add_option("--attribution", flags.attribution, "eq2 | grad_only");
    sub->add_option("--layer-mode", flags.layer_mode, "last | mean");
  };

  CLI::App* attribute = app.add_subcommand(
      "attribute", "Turn attention captures into heatmaps and rewrite the manifest");
  attribute->add_option("--manifest", flags.manifest, "Input manifest (JSONL)");
  add_common(attribute);
  add_attr(attribute);

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Score every sample and write scores.jsonl plus grouped reports");
  evaluate->add_option("--manifest", flags.manifest, "Input manifest (JSONL)");
  evaluate->add_option("--iou-tau", flags.iou_tau,
                       "Also compute IoU with the heatmap binarized at tau * max");
  add_common(evaluate);
  add_eval(evaluate);
  add_attr(evaluate);

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Per-corruption severity series (from a manifest or a scores file)");
  sweep->add_option("--manifest", flags.manifest, "Input manifest (JSONL)");
  sweep->add_option("--scores", flags.scores, "scores.jsonl from a previous evaluate");
  add_common(sweep);
  add_eval(sweep);
  add_attr(sweep);

  CLI::App* report = app.add_subcommand(
      "report", "Re-render grouped reports from a scores file");
  report->add_option("--scores", flags.scores, "scores.jsonl from a previous evaluate");
  add_common(report);
  add_eval(report);

  CLI::App* synth = app.add_subcommand(
      "synth", "Generate a synthetic cohort with planted quadrant tallies");
  synth->add_option("--spec", flags.spec, "Cohort spec (JSON)");
  synth->add_option("--seed", flags.seed, "Override the spec's seed");
  add_common(synth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitBadInput;
  }

  try {
    RunConfig config;
    if (flags.config) ApplyConfigFile(*flags.config, config);
    if (flags.manifest) config.manifest = *flags.manifest;
    if (flags.scores) config.scores = *flags.scores;
    if (flags.spec) config.spec = *flags.spec;
    if (flags.out) config.out = *flags.out;
    if (flags.theta) config.theta = *flags.theta;
    if (flags.iou_tau) config.iou_tau = *flags.iou_tau;
    if (flags.attribution) config.attribution = ParseAttributionMethod(*flags.attribution);
    if (flags.layer_mode) config.layer_mode = ParseLayerMode(*flags.layer_mode);
    if (!flags.formats.empty()) {
      config.formats.clear();
      for (const std::string& f : flags.formats) {
        for (ReportFormat rf : ParseFormatList(f)) config.formats.push_back(rf);
      }
    }
    if (flags.workers) config.workers = *flags.workers;
    if (flags.seed) config.seed = *flags.seed;
    ValidateRunConfig(config);

    if (attribute->parsed()) return CmdAttribute(config, out);
    if (evaluate->parsed()) return CmdEvaluate(config, out);
    if (sweep->parsed()) return CmdSweep(config, out);
    if (report->parsed()) return CmdReport(config, out);
    if (synth->parsed()) return CmdSynth(config, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kEmptyCohort || e.code() == ErrorCode::kEmptyReport
               ? kExitEmptyCohort
               : kExitBadInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  return kExitBadInput;
}

}  // namespace rateval::cli
