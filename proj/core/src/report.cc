#include "rateval/report.h"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdlib>
#include <set>

#include "json.hpp"

#ifndef RATEVAL_VERSION_STRING
#define RATEVAL_VERSION_STRING "0.0.0"
#endif

namespace rateval {
namespace {

using nlohmann::ordered_json;

constexpr std::string_view kCsvHeader =
    "method,corruption,severity,n,rr,rw,wr,ww,accuracy,pt,ir,valid_evidence_rate\n";

// Metrics drawn in reports, in column order.
struct MetricDef {
  std::string_view name;
  std::string_view title;
  std::optional<double> (*get)(const EvalSummary&);
};

constexpr std::array<MetricDef, 4> kMetrics = {{
    {"accuracy", "Accuracy",
     [](const EvalSummary& s) -> std::optional<double> { return s.accuracy; }},
    {"pt", "Prediction Trustworthiness",
     [](const EvalSummary& s) { return s.pt; }},
    {"ir", "Inference Reliability",
     [](const EvalSummary& s) { return s.ir; }},
    {"valid_evidence_rate", "Valid evidence rate",
     [](const EvalSummary& s) -> std::optional<double> {
       return s.valid_evidence_rate;
     }},
}};

std::string CsvField(std::string_view text) {
  if (text.find_first_of(",\"\n\r") == std::string_view::npos) {
    return std::string(text);
  }
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string CsvMetric(const std::optional<double>& v) {
  return v ? FormatSig9(*v) : std::string();
}

void AppendCsvRow(std::string& out, std::string_view method,
                  std::string_view corruption, std::uint32_t severity,
                  const EvalSummary& s) {
  out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", CsvField(method),
                     CsvField(corruption), severity, s.n, s.tally.rr, s.tally.rw,
                     s.tally.wr, s.tally.ww, FormatSig9(s.accuracy), CsvMetric(s.pt),
                     CsvMetric(s.ir), FormatSig9(s.valid_evidence_rate));
}

// The JSON number is the double nearest to the 9-digit text, so it prints
// with the same digits as the CSV cell.
ordered_json JsonMetric(double v) { return std::strtod(FormatSig9(v).c_str(), nullptr); }

ordered_json JsonMetric(const std::optional<double>& v) {
  return v ? JsonMetric(*v) : ordered_json(nullptr);
}

ordered_json SummaryJson(const EvalSummary& s) {
  ordered_json j;
  j["n"] = s.n;
  j["tally"] = {{"rr", s.tally.rr}, {"rw", s.tally.rw}, {"wr", s.tally.wr},
                {"ww", s.tally.ww}};
  j["accuracy"] = JsonMetric(s.accuracy);
  j["pt"] = JsonMetric(s.pt);
  j["ir"] = JsonMetric(s.ir);
  j["valid_evidence_rate"] = JsonMetric(s.valid_evidence_rate);
  ordered_json undefined = ordered_json::object();
  if (!s.pt) undefined["pt"] = "no correct predictions (RR + RW = 0)";
  if (!s.ir) undefined["ir"] = "no valid evidence (RR + WR = 0)";
  if (!undefined.empty()) j["undefined"] = std::move(undefined);
  return j;
}

std::string EmitJson(const GroupSummaries& summaries,
                     std::span<const SweepSeries> sweeps,
                     const ReportConfig& config) {
  ordered_json root;
  root["schema"] = kReportSchema;
  ordered_json prov;
  prov["toolkit"] = "rateval";
  prov["version"] = Version();
  prov["theta"] = config.theta;
  prov["config"] = {{"attribution", config.attribution},
                    {"layer_mode", config.layer_mode},
                    {"iou_tau", config.iou_tau ? ordered_json(*config.iou_tau)
                                               : ordered_json(nullptr)}};
  root["provenance"] = std::move(prov);

  ordered_json groups = ordered_json::array();
  for (const auto& [key, s] : summaries) {
    ordered_json g;
    g["method"] = key.method;
    g["corruption"] = key.corruption;
    g["severity"] = key.severity;
    g.update(SummaryJson(s));
    groups.push_back(std::move(g));
  }
  root["groups"] = std::move(groups);

  ordered_json series = ordered_json::array();
  for (const SweepSeries& sw : sweeps) {
    ordered_json js;
    js["method"] = sw.method;
    js["corruption"] = sw.corruption;
    ordered_json points = ordered_json::array();
    for (const SweepPoint& p : sw.points) {
      ordered_json jp;
      jp["severity"] = p.severity;
      jp.update(SummaryJson(p.summary));
      points.push_back(std::move(jp));
    }
    js["points"] = std::move(points);
    series.push_back(std::move(js));
  }
  root["sweeps"] = std::move(series);
  return root.dump(2) + "\n";
}

std::string EmitCsv(const GroupSummaries& summaries) {
  std::string out(kCsvHeader);
  for (const auto& [key, s] : summaries) {
    AppendCsvRow(out, key.method, key.corruption, key.severity, s);
  }
  return out;
}

std::string XmlEscape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr std::array<std::string_view, 8> kPalette = {
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

// Grid of panels: rows are metrics, columns are corruptions.
std::string EmitSvg(const GroupSummaries& summaries,
                    std::span<const SweepSeries> sweeps) {
  std::vector<std::string> columns;
  std::vector<std::string> methods;
  std::uint32_t max_severity = 0;
  {
    std::set<std::string> cset;
    std::set<std::string> mset;
    for (const auto& [key, s] : summaries) mset.insert(key.method);
    for (const SweepSeries& sw : sweeps) {
      cset.insert(sw.corruption);
      for (const SweepPoint& p : sw.points) max_severity = std::max(max_severity, p.severity);
    }
    columns.assign(cset.begin(), cset.end());
    methods.assign(mset.begin(), mset.end());
  }
  if (columns.empty()) columns.push_back("");

  constexpr double kPanelW = 280, kPanelH = 200;
  constexpr double kLeft = 48, kRight = 16, kTop = 34, kBottom = 36;
  constexpr double kLegendH = 28;
  const double plot_w = kPanelW - kLeft - kRight;
  const double plot_h = kPanelH - kTop - kBottom;
  const double width = kPanelW * static_cast<double>(columns.size());
  const double height = kLegendH + kPanelH * static_cast<double>(kMetrics.size());
  const double x_span = max_severity == 0 ? 1.0 : static_cast<double>(max_severity);

  std::string out;
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
      "viewBox=\"0 0 {:.0f} {:.0f}\" font-family=\"sans-serif\" font-size=\"11\">\n",
      width, height, width, height);
  out += fmt::format("<rect x=\"0\" y=\"0\" width=\"{:.0f}\" height=\"{:.0f}\" fill=\"#ffffff\"/>\n",
                     width, height);

  // Legend.
  double lx = 10;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    const auto color = kPalette[m % kPalette.size()];
    out += fmt::format(
        "<line x1=\"{:.1f}\" y1=\"14\" x2=\"{:.1f}\" y2=\"14\" stroke=\"{}\" stroke-width=\"2\"/>"
        "<text x=\"{:.1f}\" y=\"18\">{}</text>\n",
        lx, lx + 18, color, lx + 22, XmlEscape(methods[m]));
    lx += 30 + 7.0 * static_cast<double>(methods[m].size());
  }

  for (std::size_t r = 0; r < kMetrics.size(); ++r) {
    const MetricDef& metric = kMetrics[r];
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const double ox = kPanelW * static_cast<double>(c);
      const double oy = kLegendH + kPanelH * static_cast<double>(r);
      const double px = ox + kLeft;
      const double py = oy + kTop;
      auto to_x = [&](std::uint32_t sev) {
        return px + plot_w * static_cast<double>(sev) / x_span;
      };
      auto to_y = [&](double v) { return py + plot_h * (1.0 - v); };

      const std::string label = columns[c].empty() ? "clean" : columns[c];
      out += fmt::format("<g class=\"panel\" data-metric=\"{}\" data-corruption=\"{}\">\n",
                         metric.name, XmlEscape(columns[c]));
      out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\" "
                         "font-weight=\"bold\">{} / {}</text>\n",
                         ox + kPanelW / 2, oy + 18, metric.title, XmlEscape(label));
      out += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" "
                         "fill=\"none\" stroke=\"#888888\"/>\n",
                         px, py, plot_w, plot_h);
      for (int tick = 0; tick <= 4; ++tick) {
        const double v = tick / 4.0;
        out += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" "
                           "stroke=\"#e0e0e0\"/><text x=\"{:.1f}\" y=\"{:.1f}\" "
                           "text-anchor=\"end\">{:.2f}</text>\n",
                           px, to_y(v), px + plot_w, to_y(v), px - 4, to_y(v) + 4, v);
      }
      for (std::uint32_t sev = 0; sev <= max_severity; ++sev) {
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n",
                           to_x(sev), py + plot_h + 14, sev);
      }
      out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">severity</text>\n",
                         px + plot_w / 2, py + plot_h + 28);

      for (const SweepSeries& sw : sweeps) {
        if (sw.corruption != columns[c]) continue;
        const auto mit = std::find(methods.begin(), methods.end(), sw.method);
        const auto color =
            kPalette[static_cast<std::size_t>(mit - methods.begin()) % kPalette.size()];
        // Undefined values break the line into separate segments.
        std::vector<std::string> segments(1);
        for (const SweepPoint& p : sw.points) {
          const std::optional<double> v = metric.get(p.summary);
          if (!v) {
            if (!segments.back().empty()) segments.emplace_back();
            continue;
          }
          if (!segments.back().empty()) segments.back() += ' ';
          segments.back() += fmt::format("{:.2f},{:.2f}", to_x(p.severity), to_y(*v));
          out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"2.5\" fill=\"{}\"/>\n",
                             to_x(p.severity), to_y(*v), color);
        }
        for (const std::string& seg : segments) {
          if (seg.empty()) continue;
          out += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" "
                             "stroke-width=\"1.5\"/>\n",
                             seg, color);
        }
      }
      out += "</g>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace

std::string_view Version() { return RATEVAL_VERSION_STRING; }

ReportFormat ParseReportFormat(std::string_view name) {
  if (name == "json") return ReportFormat::kJson;
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "svg") return ReportFormat::kSvg;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown report format '" + std::string(name) +
                  "' (expected json, csv or svg)");
}

std::string_view ReportFormatExtension(ReportFormat format) {
  switch (format) {
    case ReportFormat::kJson: return "json";
    case ReportFormat::kCsv: return "csv";
    case ReportFormat::kSvg: return "svg";
  }
  return "";
}

std::string FormatSig9(double value) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::general, 9);
  if (ec != std::errc()) return "nan";
  return std::string(buf.data(), end);
}

std::string EmitReport(const GroupSummaries& summaries,
                       std::span<const SweepSeries> sweeps, ReportFormat format,
                       const ReportConfig& config) {
  if (summaries.empty()) {
    throw Error(ErrorCode::kEmptyReport, "no groups to report");
  }
  switch (format) {
    case ReportFormat::kJson: return EmitJson(summaries, sweeps, config);
    case ReportFormat::kCsv: return EmitCsv(summaries);
    case ReportFormat::kSvg: return EmitSvg(summaries, sweeps);
  }
  return {};
}

std::string EmitSweepCsv(std::span<const SweepSeries> sweeps) {
  if (sweeps.empty()) throw Error(ErrorCode::kEmptyReport, "no sweep series");
  std::string out(kCsvHeader);
  for (const SweepSeries& sw : sweeps) {
    for (const SweepPoint& p : sw.points) {
      AppendCsvRow(out, sw.method, p.severity == 0 ? "" : sw.corruption,
                   p.severity, p.summary);
    }
  }
  return out;
}

std::string SerializeScores(std::span<const SampleScore> scores, double theta) {
  std::string out;
  for (const SampleScore& s : scores) {
    ordered_json j;
    j["sample_id"] = s.sample_id;
    j["prediction_correct"] = s.prediction_correct;
    j["rma"] = s.rma;
    j["quadrant"] = QuadrantName(ClassifySample(s, theta));
    ordered_json flags = ordered_json::array();
    if (s.degenerate_heatmap) flags.push_back("degenerate_heatmap");
    j["flags"] = std::move(flags);
    if (s.iou) j["iou"] = *s.iou;
    j["tags"] = s.tags;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<SampleScore> ParseScores(std::istream& in) {
  std::vector<SampleScore> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(text);
      SampleScore s;
      s.sample_id = j.at("sample_id").get<std::string>();
      s.prediction_correct = j.at("prediction_correct").get<bool>();
      s.rma = j.at("rma").get<double>();
      if (!(s.rma >= 0.0 && s.rma <= 1.0)) {
        throw Error(ErrorCode::kInvalidField, "rma outside [0, 1]");
      }
      for (const auto& f : j.value("flags", nlohmann::json::array())) {
        if (f.get<std::string>() == "degenerate_heatmap") s.degenerate_heatmap = true;
      }
      if (j.contains("iou") && !j["iou"].is_null()) s.iou = j["iou"].get<double>();
      s.tags = j.value("tags", std::map<std::string, std::string>{});
      out.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError,
                  "scores line " + std::to_string(line) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), "scores line " + std::to_string(line) + ": " + e.detail());
    }
  }
  return out;
}

}  // namespace rateval
