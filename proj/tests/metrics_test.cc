#include "rateval/metrics.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "test_util.h"

namespace rateval {
namespace {

using testing::RandomMask;
using testing::RandomTensor2D;
using testing::RmaOracle;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kIoFailure;
}

TEST(BoxTest, FullImageBox) {
  const std::vector<BoundingBox> boxes = {{0, 0, 3, 2}};
  const GroundTruthMask m = MaskFromBoxes(boxes, 3, 2);
  EXPECT_EQ(m.height(), 2u);
  EXPECT_EQ(m.width(), 3u);
  for (double v : m.values().data()) EXPECT_EQ(v, 1.0);
}

TEST(BoxTest, HalfOpenCoordinates) {
  const std::vector<BoundingBox> boxes = {{0, 0, 1, 1}};
  const GroundTruthMask m = MaskFromBoxes(boxes, 2, 2);
  EXPECT_TRUE(m.at(0, 0));
  EXPECT_FALSE(m.at(0, 1));
  EXPECT_FALSE(m.at(1, 0));
  EXPECT_FALSE(m.at(1, 1));
}

TEST(BoxTest, UnionMatchesMembershipOracle) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<std::int64_t> size(1, 20);
  for (int trial = 0; trial < 200; ++trial) {
    const std::int64_t w = size(rng), h = size(rng);
    std::vector<BoundingBox> boxes;
    const int count = 1 + trial % 3;
    for (int b = 0; b < count; ++b) {
      std::uniform_int_distribution<std::int64_t> x0(0, w - 1), y0(0, h - 1);
      BoundingBox box;
      box.x_min = x0(rng);
      box.y_min = y0(rng);
      box.x_max = std::uniform_int_distribution<std::int64_t>(box.x_min + 1, w)(rng);
      box.y_max = std::uniform_int_distribution<std::int64_t>(box.y_min + 1, h)(rng);
      boxes.push_back(box);
    }
    const GroundTruthMask m = MaskFromBoxes(boxes, w, h);
    for (std::int64_t y = 0; y < h; ++y) {
      for (std::int64_t x = 0; x < w; ++x) {
        const bool inside = std::any_of(boxes.begin(), boxes.end(), [&](const BoundingBox& b) {
          return x >= b.x_min && x < b.x_max && y >= b.y_min && y < b.y_max;
        });
        ASSERT_EQ(m.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x)), inside);
      }
    }
  }
}

TEST(BoxTest, InvalidBoxes) {
  EXPECT_EQ(CodeOf([] { ValidateBox({1, 0, 1, 2}, 4, 4); }), ErrorCode::kDegenerateBox);
  EXPECT_EQ(CodeOf([] { ValidateBox({2, 3, 1, 4}, 4, 4); }), ErrorCode::kDegenerateBox);
  EXPECT_EQ(CodeOf([] { ValidateBox({-1, 0, 2, 2}, 4, 4); }), ErrorCode::kBoxOutOfBounds);
  EXPECT_EQ(CodeOf([] { ValidateBox({0, 0, 5, 2}, 4, 4); }), ErrorCode::kBoxOutOfBounds);
  EXPECT_NO_THROW(ValidateBox({0, 0, 4, 4}, 4, 4));
}

Heatmap H(std::size_t rows, std::size_t cols, std::vector<double> v) {
  return Heatmap(Tensor2D({rows, cols}, std::move(v)));
}
GroundTruthMask M(std::size_t rows, std::size_t cols, std::vector<double> v) {
  return GroundTruthMask(Tensor2D({rows, cols}, std::move(v)));
}

TEST(RmaTest, HandExamples) {
  EXPECT_EQ(Rma(H(2, 2, {1, 1, 1, 1}), M(2, 2, {1, 0, 0, 0})).value, 0.25);
  EXPECT_EQ(Rma(H(2, 2, {0, 3, 0, 0}), M(2, 2, {0, 1, 1, 0})).value, 1.0);
  EXPECT_EQ(Rma(H(2, 2, {0, 3, 0, 0}), M(2, 2, {1, 0, 0, 1})).value, 0.0);
  EXPECT_EQ(Rma(H(1, 1, {0.5}), M(1, 1, {1})).value, 1.0);
}

TEST(RmaTest, ZeroHeatmapFlagged) {
  const RmaScore s = Rma(H(2, 2, {0, 0, 0, 0}), M(2, 2, {1, 0, 0, 0}));
  EXPECT_EQ(s.value, 0.0);
  EXPECT_TRUE(s.degenerate_heatmap);
  EXPECT_FALSE(Rma(H(1, 1, {1}), M(1, 1, {0})).degenerate_heatmap);
}

TEST(RmaTest, ShapeMismatch) {
  EXPECT_EQ(CodeOf([] { Rma(H(2, 2, {1, 1, 1, 1}), M(1, 2, {1, 0})); }),
            ErrorCode::kShapeMismatch);
}

TEST(RmaTest, RandomPairsMatchOracleAndStayInUnitInterval) {
  std::mt19937_64 rng(22);
  std::uniform_int_distribution<std::size_t> dim(1, 32);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t rows = dim(rng), cols = dim(rng);
    const Tensor2D h = RandomTensor2D(rng, rows, cols);
    const GroundTruthMask m = RandomMask(rng, rows, cols);
    const double v = Rma(Heatmap(h), m).value;
    ASSERT_NEAR(v, RmaOracle(h, m.values()), 1e-12);
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
}

TEST(RmaTest, ScaleInvariance) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const Tensor2D h = RandomTensor2D(rng, 9, 11);
    const GroundTruthMask m = RandomMask(rng, 9, 11);
    const double base = Rma(Heatmap(h), m).value;
    for (double c : {1e-6, 0.5, 3.0, 1e6}) {
      Tensor2D scaled = h;
      for (double& v : scaled.mutable_data()) v *= c;
      ASSERT_NEAR(Rma(Heatmap(scaled), m).value, base, 1e-9);
    }
  }
}

TEST(RmaTest, AlignToMaskResamples) {
  const Heatmap h = H(2, 2, {0, 0, 0, 1});
  const GroundTruthMask m = M(4, 4, std::vector<double>(16, 1.0));
  const Heatmap aligned = AlignToMask(h, m);
  EXPECT_EQ(aligned.height(), 4u);
  EXPECT_NEAR(aligned.values()(3, 3), 1.0, 1e-15);
  EXPECT_NEAR(aligned.values()(1, 2), (1.0 / 3) * (2.0 / 3), 1e-15);
  EXPECT_EQ(AlignToMask(h, M(2, 2, {1, 0, 0, 1})).values(), h.values());
}

TEST(IouTest, PerfectAndDisjoint) {
  EXPECT_EQ(Iou(H(2, 2, {1, 0, 0, 1}), M(2, 2, {1, 0, 0, 1})), 1.0);
  EXPECT_EQ(Iou(H(2, 2, {1, 0, 0, 0}), M(2, 2, {0, 1, 1, 1})), 0.0);
  EXPECT_EQ(Iou(H(1, 2, {0, 0}), M(1, 2, {0, 0})), 0.0);
}

TEST(IouTest, MatchesSetOracle) {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 300; ++trial) {
    const Tensor2D h = RandomTensor2D(rng, 8, 6);
    const GroundTruthMask m = RandomMask(rng, 8, 6);
    const double tau = (trial % 9 + 1) / 10.0;
    const double peak = *std::max_element(h.data().begin(), h.data().end());
    std::set<std::size_t> fg, gt;
    for (std::size_t i = 0; i < h.size(); ++i) {
      if (h.data()[i] >= tau * peak) fg.insert(i);
      if (m.values().data()[i] == 1.0) gt.insert(i);
    }
    std::set<std::size_t> inter, uni;
    std::set_intersection(fg.begin(), fg.end(), gt.begin(), gt.end(),
                          std::inserter(inter, inter.end()));
    std::set_union(fg.begin(), fg.end(), gt.begin(), gt.end(),
                   std::inserter(uni, uni.end()));
    const double want =
        uni.empty() ? 0.0 : static_cast<double>(inter.size()) / static_cast<double>(uni.size());
    ASSERT_DOUBLE_EQ(Iou(Heatmap(h), m, tau), want);
  }
}

TEST(QuadrantTest, ThresholdIsInclusive) {
  EXPECT_EQ(ClassifyQuadrant(true, 0.5), Quadrant::kRR);
  EXPECT_EQ(ClassifyQuadrant(true, std::nextafter(0.5, 0.0)), Quadrant::kRW);
  EXPECT_EQ(ClassifyQuadrant(false, 0.5), Quadrant::kWR);
  EXPECT_EQ(ClassifyQuadrant(false, 0.1), Quadrant::kWW);
  EXPECT_EQ(ClassifyQuadrant(true, 0.3, 0.3), Quadrant::kRR);
}

TEST(QuadrantTest, NamesRoundTrip) {
  for (Quadrant q : {Quadrant::kRR, Quadrant::kRW, Quadrant::kWR, Quadrant::kWW}) {
    EXPECT_EQ(ParseQuadrant(QuadrantName(q)), q);
  }
  EXPECT_THROW(ParseQuadrant("XX"), Error);
}

TEST(TallyTest, PartitionsAndIsOrderIndependent) {
  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ScoredPrediction> records(1000);
  QuadrantTally oracle;
  for (auto& r : records) {
    r.prediction_correct = u(rng) < 0.6;
    r.rma = u(rng);
    const bool valid = r.rma >= 0.5;
    if (r.prediction_correct && valid) ++oracle.rr;
    if (r.prediction_correct && !valid) ++oracle.rw;
    if (!r.prediction_correct && valid) ++oracle.wr;
    if (!r.prediction_correct && !valid) ++oracle.ww;
  }
  const QuadrantTally t = Tally(records);
  EXPECT_EQ(t, oracle);
  EXPECT_EQ(t.total(), records.size());
  std::shuffle(records.begin(), records.end(), rng);
  EXPECT_EQ(Tally(records), t);
}

TEST(TallyTest, AddAndAccumulate) {
  QuadrantTally a;
  a.Add(Quadrant::kRR);
  a.Add(Quadrant::kWW);
  QuadrantTally b{1, 2, 3, 4};
  b += a;
  EXPECT_EQ(b, (QuadrantTally{2, 2, 3, 5}));
}

TEST(DerivedMetricsTest, Examples) {
  const QuadrantTally t{6000, 1000, 2000, 1000};
  EXPECT_NEAR(*PredictionTrustworthiness(t), 6.0 / 7.0, 1e-12);
  EXPECT_EQ(*InferenceReliability(t), 0.75);
  EXPECT_FALSE(PredictionTrustworthiness({0, 0, 3, 4}).has_value());
  EXPECT_FALSE(InferenceReliability({0, 5, 0, 4}).has_value());
  EXPECT_EQ(*PredictionTrustworthiness({0, 5, 0, 0}), 0.0);
  EXPECT_EQ(*InferenceReliability({4, 0, 0, 9}), 1.0);
}

TEST(DerivedMetricsTest, Summaries) {
  const EvalSummary s = Summarize({6000, 1000, 2000, 1000});
  EXPECT_EQ(s.n, 10000u);
  EXPECT_EQ(s.accuracy, 0.7);
  EXPECT_EQ(s.valid_evidence_rate, 0.8);
  EXPECT_NEAR(*s.pt, 6.0 / 7.0, 1e-12);
  EXPECT_EQ(*s.ir, 0.75);

  const EvalSummary all_rr = Summarize({10, 0, 0, 0});
  EXPECT_EQ(all_rr.accuracy, 1.0);
  EXPECT_EQ(*all_rr.pt, 1.0);
  EXPECT_EQ(*all_rr.ir, 1.0);

  const EvalSummary all_ww = Summarize({0, 0, 0, 10});
  EXPECT_EQ(all_ww.accuracy, 0.0);
  EXPECT_FALSE(all_ww.pt.has_value());
  EXPECT_FALSE(all_ww.ir.has_value());

  EXPECT_EQ(CodeOf([] { Summarize({}); }), ErrorCode::kEmptyCohort);
}

}  // namespace
}  // namespace rateval
