#include "rateval/manifest.h"

#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "rateval/npy.h"

namespace rateval {
namespace {

using nlohmann::json;

class LineContext {
 public:
  explicit LineContext(std::size_t line) : line_(line) {}

  [[noreturn]] void Fail(ErrorCode code, const std::string& what) const {
    throw Error(code, "manifest line " + std::to_string(line_) + ": " + what);
  }

  const json& Require(const json& obj, const char* key) const {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
      Fail(ErrorCode::kMissingField, std::string("missing field '") + key + "'");
    }
    return *it;
  }

  std::string String(const json& v, const char* key) const {
    if (!v.is_string()) Fail(ErrorCode::kInvalidField, std::string(key) + " must be a string");
    return v.get<std::string>();
  }

  std::int64_t Integer(const json& v, const char* key) const {
    if (!v.is_number_integer()) {
      Fail(ErrorCode::kInvalidField, std::string(key) + " must be an integer");
    }
    return v.get<std::int64_t>();
  }

  std::size_t Index(const json& v, const char* key) const {
    const std::int64_t i = Integer(v, key);
    if (i < 0) Fail(ErrorCode::kInvalidField, std::string(key) + " must be >= 0");
    return static_cast<std::size_t>(i);
  }

  int ClassIndex(const json& v, const char* key) const {
    const std::int64_t i = Integer(v, key);
    if (i < 0 || i > std::numeric_limits<int>::max()) {
      Fail(ErrorCode::kInvalidField, std::string(key) + " out of range");
    }
    return static_cast<int>(i);
  }

  std::vector<std::filesystem::path> Paths(const json& v, const char* key,
                                           const std::filesystem::path& base) const {
    if (!v.is_array() || v.empty()) {
      Fail(ErrorCode::kInvalidField, std::string(key) + " must be a non-empty array");
    }
    std::vector<std::filesystem::path> out;
    for (const json& p : v) out.push_back(Resolve(String(p, key), base));
    return out;
  }

  static std::filesystem::path Resolve(const std::string& p,
                                       const std::filesystem::path& base) {
    std::filesystem::path path(p);
    if (path.is_relative()) path = base / path;
    return path.lexically_normal();
  }

 private:
  std::size_t line_;
};

CaptureEvidence ParseCapture(const json& v, const LineContext& ctx,
                             const std::filesystem::path& base) {
  if (!v.is_object()) ctx.Fail(ErrorCode::kInvalidField, "capture_paths must be an object");
  CaptureEvidence c;
  c.attention_paths = ctx.Paths(ctx.Require(v, "attention"), "attention", base);
  c.gradient_paths = ctx.Paths(ctx.Require(v, "gradient"), "gradient", base);
  if (c.attention_paths.size() != c.gradient_paths.size()) {
    ctx.Fail(ErrorCode::kInvalidField,
             "capture_paths.attention and capture_paths.gradient differ in length");
  }
  if (auto it = v.find("layers"); it != v.end()) {
    if (!it->is_array() || it->size() != c.attention_paths.size()) {
      ctx.Fail(ErrorCode::kInvalidField,
               "capture_paths.layers must list one index per path pair");
    }
    for (const json& l : *it) c.layers.push_back(ctx.ClassIndex(l, "layers"));
  }
  c.cls_index = ctx.Index(ctx.Require(v, "cls_index"), "cls_index");
  if (auto it = v.find("non_image_tokens"); it != v.end()) {
    if (!it->is_array()) ctx.Fail(ErrorCode::kInvalidField, "non_image_tokens must be an array");
    for (const json& t : *it) c.non_image_tokens.push_back(ctx.Index(t, "non_image_tokens"));
  }
  const json& grid = ctx.Require(v, "grid");
  if (!grid.is_array() || grid.size() != 2) {
    ctx.Fail(ErrorCode::kInvalidField, "grid must be [rows, cols]");
  }
  c.grid.rows = ctx.Index(grid[0], "grid");
  c.grid.cols = ctx.Index(grid[1], "grid");
  if (c.grid.rows == 0 || c.grid.cols == 0) {
    ctx.Fail(ErrorCode::kInvalidField, "grid dimensions must be >= 1");
  }
  if (auto it = v.find("target_class"); it != v.end() && !it->is_null()) {
    c.target_class = ctx.ClassIndex(*it, "target_class");
  }
  return c;
}

BoxGroundTruth ParseBoxes(const json& obj, const LineContext& ctx) {
  BoxGroundTruth gt;
  gt.image_width = ctx.Integer(ctx.Require(obj, "image_width"), "image_width");
  gt.image_height = ctx.Integer(ctx.Require(obj, "image_height"), "image_height");
  if (gt.image_width < 1 || gt.image_height < 1) {
    ctx.Fail(ErrorCode::kInvalidField, "image dimensions must be >= 1");
  }
  const json& boxes = obj.at("bboxes");
  if (!boxes.is_array()) ctx.Fail(ErrorCode::kInvalidField, "bboxes must be an array");
  for (const json& b : boxes) {
    if (!b.is_array() || b.size() != 4) {
      ctx.Fail(ErrorCode::kInvalidField, "each bbox must be [x_min, y_min, x_max, y_max]");
    }
    BoundingBox box{ctx.Integer(b[0], "bbox"), ctx.Integer(b[1], "bbox"),
                    ctx.Integer(b[2], "bbox"), ctx.Integer(b[3], "bbox")};
    try {
      ValidateBox(box, gt.image_width, gt.image_height);
    } catch (const Error& e) {
      ctx.Fail(e.code(), e.detail());
    }
    gt.boxes.push_back(box);
  }
  return gt;
}

std::map<std::string, std::string> ParseTags(const json& obj, const LineContext& ctx) {
  std::map<std::string, std::string> tags;
  auto it = obj.find("tags");
  if (it == obj.end() || it->is_null()) return tags;
  if (!it->is_object()) ctx.Fail(ErrorCode::kInvalidField, "tags must be an object");
  for (const auto& [key, value] : it->items()) {
    if (value.is_string()) {
      tags[key] = value.get<std::string>();
    } else if (value.is_number_integer()) {
      tags[key] = std::to_string(value.get<std::int64_t>());
    } else {
      ctx.Fail(ErrorCode::kInvalidField, "tag '" + key + "' must be a string or integer");
    }
  }
  return tags;
}

SampleEntry ParseEntry(const std::string& text, std::size_t line,
                       const std::filesystem::path& base) {
  const LineContext ctx(line);
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    ctx.Fail(ErrorCode::kParseError, e.what());
  }
  if (!obj.is_object()) ctx.Fail(ErrorCode::kParseError, "line is not a JSON object");

  SampleEntry e;
  e.line = line;
  e.sample_id = ctx.String(ctx.Require(obj, "sample_id"), "sample_id");
  if (e.sample_id.empty()) ctx.Fail(ErrorCode::kInvalidField, "sample_id is empty");
  e.true_class = ctx.ClassIndex(ctx.Require(obj, "true_class"), "true_class");
  e.pred_class = ctx.ClassIndex(ctx.Require(obj, "pred_class"), "pred_class");

  const bool has_heatmap = obj.contains("heatmap_path");
  const bool has_capture = obj.contains("capture_paths");
  if (has_heatmap && has_capture) {
    ctx.Fail(ErrorCode::kConflictingEvidence,
             "sample '" + e.sample_id + "' has both heatmap_path and capture_paths");
  }
  if (has_heatmap) {
    e.evidence = HeatmapEvidence{
        LineContext::Resolve(ctx.String(obj["heatmap_path"], "heatmap_path"), base)};
  } else if (has_capture) {
    CaptureEvidence c = ParseCapture(obj["capture_paths"], ctx, base);
    if (c.target_class && *c.target_class != e.true_class) {
      ctx.Fail(ErrorCode::kInvalidField,
               "sample '" + e.sample_id + "' gradient target class " +
                   std::to_string(*c.target_class) +
                   " differs from the annotated class " +
                   std::to_string(e.true_class));
    }
    e.evidence = std::move(c);
  } else {
    ctx.Fail(ErrorCode::kMissingField,
             "sample '" + e.sample_id + "' needs heatmap_path or capture_paths");
  }

  const bool has_mask = obj.contains("mask_path");
  const bool has_boxes = obj.contains("bboxes");
  if (has_mask && has_boxes) {
    ctx.Fail(ErrorCode::kConflictingGroundTruth,
             "sample '" + e.sample_id + "' has both mask_path and bboxes");
  }
  if (has_mask) {
    e.ground_truth = MaskGroundTruth{
        LineContext::Resolve(ctx.String(obj["mask_path"], "mask_path"), base)};
  } else if (has_boxes) {
    e.ground_truth = ParseBoxes(obj, ctx);
  } else {
    ctx.Fail(ErrorCode::kMissingField,
             "sample '" + e.sample_id + "' needs mask_path or bboxes");
  }

  e.tags = ParseTags(obj, ctx);
  return e;
}

bool IsBlank(const std::string& s) {
  return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

std::string RelativeTo(const std::filesystem::path& p,
                       const std::filesystem::path& base) {
  if (base.empty()) return p.generic_string();
  std::filesystem::path rel = p.lexically_relative(base);
  return rel.empty() ? p.generic_string() : rel.generic_string();
}

json PathArray(const std::vector<std::filesystem::path>& paths,
               const std::filesystem::path& base) {
  json arr = json::array();
  for (const auto& p : paths) arr.push_back(RelativeTo(p, base));
  return arr;
}

}  // namespace

Manifest ParseManifest(std::istream& in, const std::filesystem::path& base_dir) {
  const std::filesystem::path base =
      (base_dir.empty() ? std::filesystem::current_path()
                        : std::filesystem::absolute(base_dir))
          .lexically_normal();
  Manifest manifest;
  std::unordered_set<std::string> seen;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (IsBlank(text)) continue;
    SampleEntry entry = ParseEntry(text, line, base);
    if (!seen.insert(entry.sample_id).second) {
      throw Error(ErrorCode::kDuplicateSampleId,
                  "manifest line " + std::to_string(line) + ": sample_id '" +
                      entry.sample_id + "' already used");
    }
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

Manifest LoadManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, path.string() + ": cannot open manifest");
  return ParseManifest(in, std::filesystem::absolute(path).lexically_normal().parent_path());
}

std::string SerializeEntry(const SampleEntry& entry,
                           const std::filesystem::path& base_dir) {
  // ordered_json keeps the field order stable and human-friendly.
  nlohmann::ordered_json obj;
  obj["sample_id"] = entry.sample_id;
  obj["true_class"] = entry.true_class;
  obj["pred_class"] = entry.pred_class;
  if (const auto* h = std::get_if<HeatmapEvidence>(&entry.evidence)) {
    obj["heatmap_path"] = RelativeTo(h->heatmap_path, base_dir);
  } else {
    const auto& c = std::get<CaptureEvidence>(entry.evidence);
    nlohmann::ordered_json cap;
    cap["attention"] = PathArray(c.attention_paths, base_dir);
    cap["gradient"] = PathArray(c.gradient_paths, base_dir);
    if (!c.layers.empty()) cap["layers"] = c.layers;
    cap["cls_index"] = c.cls_index;
    cap["non_image_tokens"] = c.non_image_tokens;
    cap["grid"] = {c.grid.rows, c.grid.cols};
    if (c.target_class) cap["target_class"] = *c.target_class;
    obj["capture_paths"] = std::move(cap);
  }
  if (const auto* m = std::get_if<MaskGroundTruth>(&entry.ground_truth)) {
    obj["mask_path"] = RelativeTo(m->mask_path, base_dir);
  } else {
    const auto& b = std::get<BoxGroundTruth>(entry.ground_truth);
    nlohmann::ordered_json boxes = nlohmann::ordered_json::array();
    for (const BoundingBox& box : b.boxes) {
      boxes.push_back({box.x_min, box.y_min, box.x_max, box.y_max});
    }
    obj["bboxes"] = std::move(boxes);
    obj["image_width"] = b.image_width;
    obj["image_height"] = b.image_height;
  }
  if (!entry.tags.empty()) obj["tags"] = entry.tags;
  return obj.dump();
}

void WriteManifest(const Manifest& manifest, const std::filesystem::path& path) {
  const std::filesystem::path base =
      std::filesystem::absolute(path).lexically_normal().parent_path();
  std::string out;
  for (const SampleEntry& e : manifest.entries) {
    out += SerializeEntry(e, base);
    out += '\n';
  }
  WriteFileAtomic(path, out);
}

}  // namespace rateval
