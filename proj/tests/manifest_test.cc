#include "rateval/manifest.h"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "rateval/maps.h"
#include "rateval/npy.h"
#include "test_util.h"

namespace rateval {
namespace {

using testing::FixtureDir;
using testing::ScratchDir;

Manifest Parse(const std::string& text, const std::filesystem::path& base = "/data") {
  std::istringstream in(text);
  return ParseManifest(in, base);
}

// Returns the error raised by parsing `text`; fails the test when none is.
Error ParseError(const std::string& text) {
  try {
    Parse(text);
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "expected failure for: " << text;
  return Error(ErrorCode::kIoFailure, "none");
}

constexpr const char* kHeatmapMask =
    R"({"sample_id": "a", "true_class": 1, "pred_class": 1, "heatmap_path": "h/a.npy", "mask_path": "m/a.npy", "tags": {"method": "ZS"}})";
constexpr const char* kHeatmapBoxes =
    R"({"sample_id": "b", "true_class": 1, "pred_class": 2, "heatmap_path": "/abs/b.npy", "bboxes": [[0, 0, 2, 3], [1, 1, 4, 4]], "image_width": 4, "image_height": 5, "tags": {"method": "FT", "corruption": "blur", "severity": 2}})";
constexpr const char* kCaptureMask =
    R"({"sample_id": "c", "true_class": 7, "pred_class": 7, "capture_paths": {"attention": ["a0.npy", "a1.npy"], "gradient": ["g0.npy", "g1.npy"], "layers": [10, 11], "cls_index": 0, "non_image_tokens": [0], "grid": [7, 7], "target_class": 7}, "mask_path": "m/c.npy"})";
constexpr const char* kCaptureBoxes =
    R"({"sample_id": "d", "true_class": 0, "pred_class": 3, "capture_paths": {"attention": ["a0.npy"], "gradient": ["g0.npy"], "cls_index": 0, "non_image_tokens": [0, 50], "grid": [7, 7]}, "bboxes": [[2, 2, 3, 3]], "image_width": 8, "image_height": 8})";

TEST(ManifestTest, EmptyInputGivesEmptyManifest) {
  EXPECT_TRUE(Parse("").entries.empty());
  EXPECT_TRUE(Parse("\n\n  \n").entries.empty());
}

TEST(ManifestTest, ParsesAllEvidenceAndGroundTruthVariants) {
  const std::string text = std::string(kHeatmapMask) + "\n" + kHeatmapBoxes + "\n\n" +
                           kCaptureMask + "\n" + kCaptureBoxes + "\n";
  const Manifest m = Parse(text);
  ASSERT_EQ(m.entries.size(), 4u);

  const SampleEntry& a = m.entries[0];
  EXPECT_EQ(a.sample_id, "a");
  EXPECT_TRUE(a.prediction_correct());
  EXPECT_EQ(std::get<HeatmapEvidence>(a.evidence).heatmap_path,
            std::filesystem::path("/data/h/a.npy"));
  EXPECT_EQ(std::get<MaskGroundTruth>(a.ground_truth).mask_path,
            std::filesystem::path("/data/m/a.npy"));
  EXPECT_EQ(a.tags.at("method"), "ZS");
  EXPECT_EQ(a.line, 1u);

  const SampleEntry& b = m.entries[1];
  EXPECT_FALSE(b.prediction_correct());
  EXPECT_EQ(std::get<HeatmapEvidence>(b.evidence).heatmap_path,
            std::filesystem::path("/abs/b.npy"));
  const auto& boxes = std::get<BoxGroundTruth>(b.ground_truth);
  ASSERT_EQ(boxes.boxes.size(), 2u);
  EXPECT_EQ(boxes.boxes[1].x_max, 4);
  EXPECT_EQ(boxes.image_width, 4);
  EXPECT_EQ(boxes.image_height, 5);
  EXPECT_EQ(b.tags.at("severity"), "2");

  const SampleEntry& c = m.entries[2];
  EXPECT_EQ(c.line, 4u);
  const auto& cap = std::get<CaptureEvidence>(c.evidence);
  EXPECT_EQ(cap.attention_paths.size(), 2u);
  EXPECT_EQ(cap.gradient_paths[1], std::filesystem::path("/data/g1.npy"));
  EXPECT_EQ(cap.layers, (std::vector<int>{10, 11}));
  EXPECT_EQ(cap.grid.rows, 7u);
  EXPECT_EQ(cap.target_class, 7);

  const auto& cap_d = std::get<CaptureEvidence>(m.entries[3].evidence);
  EXPECT_EQ(cap_d.non_image_tokens, (std::vector<std::size_t>{0, 50}));
  EXPECT_FALSE(cap_d.target_class.has_value());
}

TEST(ManifestTest, LoadsCaptureFixture) {
  const Manifest m = LoadManifest(FixtureDir() / "capture" / "manifest.jsonl");
  ASSERT_EQ(m.entries.size(), 2u);
  const auto& cap = std::get<CaptureEvidence>(m.entries[0].evidence);
  EXPECT_TRUE(std::filesystem::exists(cap.attention_paths[0]));
  EXPECT_TRUE(std::filesystem::exists(
      std::get<MaskGroundTruth>(m.entries[0].ground_truth).mask_path));
}

TEST(ManifestTest, DuplicateSampleIdRejected) {
  const Error e = ParseError(std::string(kHeatmapMask) + "\n" + kHeatmapMask);
  EXPECT_EQ(e.code(), ErrorCode::kDuplicateSampleId);
  EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
}

TEST(ManifestTest, MalformedLinesNameTheirLine) {
  struct Case {
    std::string line;
    ErrorCode code;
  };
  const std::vector<Case> cases = {
      {"{not json", ErrorCode::kParseError},
      {"[1, 2]", ErrorCode::kParseError},
      {R"({"true_class": 1, "pred_class": 1, "heatmap_path": "x", "mask_path": "y"})",
       ErrorCode::kMissingField},
      {R"({"sample_id": "z", "pred_class": 1, "heatmap_path": "x", "mask_path": "y"})",
       ErrorCode::kMissingField},
      {R"({"sample_id": "z", "true_class": 1, "pred_class": 1, "mask_path": "y"})",
       ErrorCode::kMissingField},
      {R"({"sample_id": "z", "true_class": 1, "pred_class": 1, "heatmap_path": "x"})",
       ErrorCode::kMissingField},
      {R"({"sample_id": "z", "true_class": "one", "pred_class": 1, "heatmap_path": "x", "mask_path": "y"})",
       ErrorCode::kInvalidField},
      {R"({"sample_id": "z", "true_class": 1, "pred_class": 1, "heatmap_path": "x", "capture_paths": {"attention": ["a"], "gradient": ["g"], "grid": [1, 1]}, "mask_path": "y"})",
       ErrorCode::kConflictingEvidence},
      {R"({"sample_id": "z", "true_class": 1, "pred_class": 1, "heatmap_path": "x", "mask_path": "y", "bboxes": [[0, 0, 1, 1]], "image_width": 2, "image_height": 2})",
       ErrorCode::kConflictingGroundTruth},
      {R"({"sample_id": "z", "true_class": 1, "pred_class": 1, "capture_paths": {"attention": ["a"], "gradient": ["g"], "cls_index": 0, "non_image_tokens": [0], "grid": [1, 1], "target_class": 4}, "mask_path": "y"})",
       ErrorCode::kInvalidField},
      {R"({"sample_id": "z", "true_class": 1, "pred_class": 1, "heatmap_path": "x", "bboxes": [[1, 1, 1, 2]], "image_width": 2, "image_height": 2})",
       ErrorCode::kDegenerateBox},
      {R"({"sample_id": "z", "true_class": 1, "pred_class": 1, "heatmap_path": "x", "bboxes": [[0, 0, 3, 2]], "image_width": 2, "image_height": 2})",
       ErrorCode::kBoxOutOfBounds},
      {R"({"sample_id": "z", "true_class": 1, "pred_class": 1, "heatmap_path": "x", "bboxes": [[0, 0, 1, 1]]})",
       ErrorCode::kMissingField},
  };
  for (const Case& c : cases) {
    const Error e = ParseError(std::string(kHeatmapMask) + "\n\n" + c.line + "\n");
    EXPECT_EQ(e.code(), c.code) << c.line << " -> " << e.what();
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(ManifestTest, WriteThenReloadPreservesEntries) {
  ScratchDir dir("manifest");
  const std::string text = std::string(kHeatmapMask) + "\n" + kHeatmapBoxes + "\n" +
                           kCaptureMask + "\n" + kCaptureBoxes + "\n";
  const Manifest original = Parse(text, dir.path());
  WriteManifest(original, dir / "out.jsonl");
  const Manifest back = LoadManifest(dir / "out.jsonl");
  ASSERT_EQ(back.entries.size(), original.entries.size());
  for (std::size_t i = 0; i < back.entries.size(); ++i) {
    EXPECT_EQ(SerializeEntry(back.entries[i], dir.path()),
              SerializeEntry(original.entries[i], dir.path()));
  }
  // Paths under the manifest directory are stored relative.
  EXPECT_NE(SerializeEntry(original.entries[0], dir.path()).find("\"h/a.npy\""),
            std::string::npos);
}

TEST(MapsTest, MaskMustBeBinary) {
  EXPECT_NO_THROW(GroundTruthMask(Tensor2D({1, 2}, {0.0, 1.0})));
  try {
    GroundTruthMask(Tensor2D({1, 2}, {0.5, 1.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMaskNotBinary);
  }
}

TEST(MapsTest, HeatmapRejectsNegativeAndNonFinite) {
  EXPECT_THROW(Heatmap(Tensor2D({1, 1}, {-1.0})), Error);
  EXPECT_THROW(Heatmap(Tensor2D({1, 1}, {std::nan("")})), Error);
  EXPECT_NO_THROW(Heatmap(Tensor2D({1, 1}, {0.0})));
}

}  // namespace
}  // namespace rateval
