#include "rateval/analysis.h"

#include <algorithm>
#include <charconv>

namespace rateval {

Quadrant ClassifySample(const SampleScore& s, double theta) {
  if (s.degenerate_heatmap) {
    return s.prediction_correct ? Quadrant::kRW : Quadrant::kWW;
  }
  return ClassifyQuadrant(s.prediction_correct, s.rma, theta);
}

GroupKey GroupKeyFromTags(const std::map<std::string, std::string>& tags) {
  GroupKey key;
  auto method = tags.find("method");
  if (method == tags.end() || method->second.empty()) {
    throw Error(ErrorCode::kMissingTag, "record has no 'method' tag");
  }
  key.method = method->second;
  if (auto c = tags.find("corruption"); c != tags.end()) key.corruption = c->second;

  auto sev = tags.find("severity");
  if (sev == tags.end() || sev->second.empty()) {
    if (!key.corruption.empty()) {
      throw Error(ErrorCode::kMissingTag,
                  "corruption '" + key.corruption + "' has no 'severity' tag");
    }
    return key;
  }
  const std::string& text = sev->second;
  std::uint32_t value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw Error(ErrorCode::kInvalidTag,
                "severity '" + text + "' is not a non-negative integer");
  }
  key.severity = value;
  if (key.corruption.empty() != (key.severity == 0)) {
    throw Error(ErrorCode::kInvalidTag,
                "severity " + text + " with corruption '" + key.corruption +
                    "' (severity 0 is reserved for clean data)");
  }
  return key;
}

GroupSummaries GroupAndSummarize(std::span<const SampleScore> records,
                                 double theta) {
  std::vector<const SampleScore*> order;
  order.reserve(records.size());
  for (const SampleScore& r : records) order.push_back(&r);
  std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
    return a->sample_id < b->sample_id;
  });

  std::map<GroupKey, QuadrantTally> tallies;
  for (const SampleScore* r : order) {
    GroupKey key;
    try {
      key = GroupKeyFromTags(r->tags);
    } catch (const Error& e) {
      throw Error(e.code(), "sample '" + r->sample_id + "': " + e.detail());
    }
    tallies[key].Add(ClassifySample(*r, theta));
  }

  GroupSummaries out;
  for (const auto& [key, tally] : tallies) out.emplace(key, Summarize(tally));
  return out;
}

std::vector<SweepSeries> BuildSweeps(const GroupSummaries& summaries) {
  std::map<std::string, const EvalSummary*> clean;
  std::map<std::pair<std::string, std::string>, std::vector<SweepPoint>> corrupted;
  for (const auto& [key, summary] : summaries) {
    if (key.corruption.empty()) {
      clean[key.method] = &summary;
    } else {
      corrupted[{key.method, key.corruption}].push_back({key.severity, summary});
    }
  }

  std::map<std::pair<std::string, std::string>, SweepSeries> series;
  for (auto& [id, points] : corrupted) {
    std::sort(points.begin(), points.end(),
              [](const SweepPoint& a, const SweepPoint& b) {
                return a.severity < b.severity;
              });
    SweepSeries s{id.first, id.second, {}};
    if (auto it = clean.find(id.first); it != clean.end()) {
      s.points.push_back({0, *it->second});
    }
    s.points.insert(s.points.end(), points.begin(), points.end());
    series.emplace(id, std::move(s));
  }
  for (const auto& [method, summary] : clean) {
    const bool has_corrupted =
        std::any_of(corrupted.begin(), corrupted.end(),
                    [&](const auto& kv) { return kv.first.first == method; });
    if (!has_corrupted) {
      series.emplace(std::make_pair(method, std::string()),
                     SweepSeries{method, "", {{0, *summary}}});
    }
  }

  std::vector<SweepSeries> out;
  out.reserve(series.size());
  for (auto& [id, s] : series) out.push_back(std::move(s));
  return out;
}

}  // namespace rateval
