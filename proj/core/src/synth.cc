#include "rateval/synth.h"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <set>

#include "json.hpp"
#include "rateval/npy.h"

namespace rateval {
namespace {

using nlohmann::json;

QuadrantTally ParseTally(const json& j) {
  QuadrantTally t;
  if (j.is_array()) {
    if (j.size() != 4) {
      throw Error(ErrorCode::kInvalidField, "tally array must be [rr, rw, wr, ww]");
    }
    t = {j[0].get<std::uint64_t>(), j[1].get<std::uint64_t>(),
         j[2].get<std::uint64_t>(), j[3].get<std::uint64_t>()};
  } else if (j.is_object()) {
    t.rr = j.value("rr", std::uint64_t{0});
    t.rw = j.value("rw", std::uint64_t{0});
    t.wr = j.value("wr", std::uint64_t{0});
    t.ww = j.value("ww", std::uint64_t{0});
  } else {
    throw Error(ErrorCode::kInvalidField, "tally must be an object or array");
  }
  return t;
}

GroundTruthStyle ParseStyle(const std::string& s) {
  if (s == "mask") return GroundTruthStyle::kMask;
  if (s == "bbox" || s == "boxes") return GroundTruthStyle::kBoxes;
  if (s == "mixed") return GroundTruthStyle::kMixed;
  throw Error(ErrorCode::kInvalidField,
              "ground_truth must be mask, bbox or mixed, got '" + s + "'");
}

std::string FileStem(std::size_t index, const GroupKey& key) {
  std::string label = key.method + "-" +
                      (key.corruption.empty() ? std::string("clean") : key.corruption) +
                      "-" + std::to_string(key.severity);
  for (char& c : label) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  }
  return fmt::format("s{:06d}-{}", index, label);
}

std::vector<BoundingBox> DrawBoxes(SplitMix64& rng, std::size_t width,
                                   std::size_t height) {
  while (true) {
    const std::uint64_t count = 1 + rng.UniformIndex(2);
    std::vector<BoundingBox> boxes;
    std::uint64_t covered_upper_bound = 0;
    for (std::uint64_t b = 0; b < count; ++b) {
      const std::uint64_t x0 = rng.UniformIndex(width);
      const std::uint64_t x1 = x0 + 1 + rng.UniformIndex(width - x0);
      const std::uint64_t y0 = rng.UniformIndex(height);
      const std::uint64_t y1 = y0 + 1 + rng.UniformIndex(height - y0);
      boxes.push_back({static_cast<std::int64_t>(x0), static_cast<std::int64_t>(y0),
                       static_cast<std::int64_t>(x1), static_cast<std::int64_t>(y1)});
      covered_upper_bound += (x1 - x0) * (y1 - y0);
    }
    // Reject masks that cover the whole image; the invalid-evidence draws
    // need somewhere outside the mask to put mass.
    if (covered_upper_bound < width * height) return boxes;
    const GroundTruthMask m = MaskFromBoxes(boxes, static_cast<std::int64_t>(width),
                                            static_cast<std::int64_t>(height));
    const auto v = m.values().data();
    if (std::find(v.begin(), v.end(), 0.0) != v.end()) return boxes;
  }
}

}  // namespace

std::uint64_t SplitMix64::Next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix64::Uniform01() {
  return static_cast<double>(Next() >> 11) * 0x1.0p-53;
}

double SplitMix64::Uniform(double lo, double hi) {
  return lo + (hi - lo) * Uniform01();
}

std::uint64_t SplitMix64::UniformIndex(std::uint64_t n) {
  // High 64 bits of the 128-bit product Next() * n.
  const std::uint64_t a = Next();
  const std::uint64_t a_lo = a & 0xFFFFFFFFULL, a_hi = a >> 32;
  const std::uint64_t n_lo = n & 0xFFFFFFFFULL, n_hi = n >> 32;
  const std::uint64_t lo_lo = a_lo * n_lo;
  const std::uint64_t hi_lo = a_hi * n_lo;
  const std::uint64_t lo_hi = a_lo * n_hi;
  const std::uint64_t hi_hi = a_hi * n_hi;
  const std::uint64_t cross = (lo_lo >> 32) + (hi_lo & 0xFFFFFFFFULL) + lo_hi;
  return hi_hi + (hi_lo >> 32) + (cross >> 32);
}

Heatmap GenerateHeatmapWithRma(double target, const GroundTruthMask& mask,
                               std::uint64_t seed) {
  if (!(target >= 0.0 && target <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "target RMA must lie in [0, 1]");
  }
  const auto m = mask.values().data();
  const std::size_t inside_count =
      static_cast<std::size_t>(std::count(m.begin(), m.end(), 1.0));
  const std::size_t outside_count = m.size() - inside_count;
  if (target > 0.0 && inside_count == 0) {
    throw Error(ErrorCode::kInfeasibleTarget,
                "target > 0 needs at least one in-mask pixel");
  }
  if (target < 1.0 && outside_count == 0) {
    throw Error(ErrorCode::kInfeasibleTarget,
                "target < 1 needs at least one out-of-mask pixel");
  }

  SplitMix64 rng(seed);
  std::vector<double> weights(m.size());
  double inside_weight = 0.0;
  double outside_weight = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    weights[i] = 0.5 + rng.Uniform01();
    (m[i] != 0.0 ? inside_weight : outside_weight) += weights[i];
  }
  Tensor2D values({mask.height(), mask.width()}, DType::kFloat64);
  auto h = values.mutable_data();
  for (std::size_t i = 0; i < m.size(); ++i) {
    h[i] = m[i] != 0.0 ? target * weights[i] / inside_weight
                       : (1.0 - target) * weights[i] / outside_weight;
  }
  return Heatmap(std::move(values));
}

double BruteForceRma(const Heatmap& heatmap, const GroundTruthMask& mask) {
  const Tensor2D& h = heatmap.values();
  const Tensor2D& m = mask.values();
  if (h.dim(0) != m.dim(0) || h.dim(1) != m.dim(1)) {
    throw Error(ErrorCode::kShapeMismatch, "heatmap and mask differ in shape");
  }
  double numerator = 0.0;
  double denominator = 0.0;
  for (std::size_t r = 0; r < h.dim(0); ++r) {
    for (std::size_t c = 0; c < h.dim(1); ++c) {
      numerator += h(r, c) * m(r, c);
      denominator += h(r, c);
    }
  }
  if (denominator == 0.0) {
    throw Error(ErrorCode::kInvalidHeatmap, "heatmap has zero mass");
  }
  return numerator / denominator;
}

PlantedCohortSpec ParsePlantedCohortSpec(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, std::string("cohort spec: ") + e.what());
  }
  try {
    PlantedCohortSpec spec;
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.width = j.value("width", std::size_t{16});
    spec.height = j.value("height", std::size_t{16});
    spec.num_classes = j.value("num_classes", 1000);
    spec.ground_truth = ParseStyle(j.value("ground_truth", std::string("mixed")));

    auto add = [&](GroupKey key, QuadrantTally tally) {
      // Round-trips through the tag rules so a spec can never plant a group
      // the evaluator would reject.
      std::map<std::string, std::string> tags{{"method", key.method}};
      if (!key.corruption.empty()) {
        tags["corruption"] = key.corruption;
        tags["severity"] = std::to_string(key.severity);
      } else if (key.severity != 0) {
        tags["severity"] = std::to_string(key.severity);
      }
      GroupKeyFromTags(tags);
      spec.groups.push_back({std::move(key), tally});
    };

    for (const json& g : j.value("groups", json::array())) {
      add(GroupKey{g.at("method").get<std::string>(), g.value("corruption", std::string()),
                   g.value("severity", std::uint32_t{0})},
          ParseTally(g.at("tally")));
    }
    if (j.contains("grid")) {
      const json& grid = j["grid"];
      const QuadrantTally tally = ParseTally(grid.at("tally"));
      const auto methods = grid.at("methods").get<std::vector<std::string>>();
      const auto corruptions =
          grid.value("corruptions", std::vector<std::string>{});
      const auto severities =
          grid.value("severities", std::vector<std::uint32_t>{});
      const bool include_clean = grid.value("include_clean", true);
      for (const std::string& method : methods) {
        if (include_clean) add(GroupKey{method, "", 0}, tally);
        for (const std::string& corruption : corruptions) {
          for (std::uint32_t severity : severities) {
            add(GroupKey{method, corruption, severity}, tally);
          }
        }
      }
    }

    std::set<GroupKey> seen;
    for (const PlantedGroup& g : spec.groups) {
      if (!seen.insert(g.key).second) {
        throw Error(ErrorCode::kInvalidField,
                    "group (" + g.key.method + ", '" + g.key.corruption + "', " +
                        std::to_string(g.key.severity) + ") listed twice");
      }
    }
    return spec;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidField, std::string("cohort spec: ") + e.what());
  } catch (const Error& e) {
    throw Error(e.code(), "cohort spec: " + e.detail());
  }
}

Manifest GeneratePlantedCohort(const PlantedCohortSpec& spec,
                               const std::filesystem::path& out_dir) {
  if (spec.width < 2 || spec.height < 2) {
    throw Error(ErrorCode::kInvalidArgument, "cohort images must be at least 2x2");
  }
  if (spec.num_classes < 2) {
    throw Error(ErrorCode::kInvalidArgument, "cohort needs at least 2 classes");
  }
  const std::filesystem::path root =
      std::filesystem::absolute(out_dir).lexically_normal();
  std::error_code ec;
  std::filesystem::create_directories(root / "masks", ec);
  std::filesystem::create_directories(root / "heatmaps", ec);
  if (ec) {
    throw Error(ErrorCode::kIoFailure, root.string() + ": " + ec.message());
  }

  SplitMix64 rng(spec.seed);
  const auto classes = static_cast<std::uint64_t>(spec.num_classes);
  const auto width = static_cast<std::int64_t>(spec.width);
  const auto height = static_cast<std::int64_t>(spec.height);
  Manifest manifest;
  std::size_t index = 0;

  for (const PlantedGroup& group : spec.groups) {
    std::vector<Quadrant> plan;
    plan.insert(plan.end(), group.tally.rr, Quadrant::kRR);
    plan.insert(plan.end(), group.tally.rw, Quadrant::kRW);
    plan.insert(plan.end(), group.tally.wr, Quadrant::kWR);
    plan.insert(plan.end(), group.tally.ww, Quadrant::kWW);
    for (std::size_t i = plan.size(); i > 1; --i) {
      std::swap(plan[i - 1], plan[rng.UniformIndex(i)]);
    }

    std::map<std::string, std::string> tags{{"method", group.key.method}};
    if (!group.key.corruption.empty()) {
      tags["corruption"] = group.key.corruption;
      tags["severity"] = std::to_string(group.key.severity);
    }

    for (Quadrant q : plan) {
      const bool correct = q == Quadrant::kRR || q == Quadrant::kRW;
      const bool valid = q == Quadrant::kRR || q == Quadrant::kWR;

      SampleEntry e;
      const std::string stem = FileStem(index++, group.key);
      e.sample_id = stem;
      e.true_class = static_cast<int>(rng.UniformIndex(classes));
      e.pred_class =
          correct ? e.true_class
                  : static_cast<int>((static_cast<std::uint64_t>(e.true_class) + 1 +
                                      rng.UniformIndex(classes - 1)) %
                                     classes);
      std::vector<BoundingBox> boxes = DrawBoxes(rng, spec.width, spec.height);
      const double target = valid ? rng.Uniform(0.55, 1.0) : rng.Uniform(0.0, 0.45);
      const std::uint64_t heatmap_seed = rng.Next();

      const GroundTruthMask mask = MaskFromBoxes(boxes, width, height);
      const Heatmap heatmap = GenerateHeatmapWithRma(target, mask, heatmap_seed);
      const std::filesystem::path heatmap_path = root / "heatmaps" / (stem + ".npy");
      WriteNpy(heatmap.values(), heatmap_path);
      e.evidence = HeatmapEvidence{heatmap_path};

      const bool use_mask =
          spec.ground_truth == GroundTruthStyle::kMask ||
          (spec.ground_truth == GroundTruthStyle::kMixed && index % 2 == 1);
      if (use_mask) {
        const std::filesystem::path mask_path = root / "masks" / (stem + ".npy");
        WriteNpy(mask.values(), mask_path);
        e.ground_truth = MaskGroundTruth{mask_path};
      } else {
        e.ground_truth = BoxGroundTruth{std::move(boxes), width, height};
      }
      e.tags = tags;
      manifest.entries.push_back(std::move(e));
    }
  }
  WriteManifest(manifest, root / "manifest.jsonl");
  return manifest;
}

}  // namespace rateval
