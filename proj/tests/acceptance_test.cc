// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "commands.h"
#include "rateval/analysis.h"
#include "rateval/attribution.h"
#include "rateval/metrics.h"
#include "rateval/npy.h"
#include "test_util.h"

namespace rateval {
namespace {

using testing::RandomAttention;
using testing::RandomMask;
using testing::RandomTensor2D;
using testing::RandomTensor3D;
using testing::RmaOracle;
using testing::ScratchDir;
using testing::TripleLoopRelevance;

struct Outcome {
  bool pass = true;
  std::string detail;
};

Outcome Fail(std::string detail) { return {false, std::move(detail)}; }

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

Outcome RmaOracleEquivalence() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> dim(1, 64);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t rows = dim(rng), cols = dim(rng);
    const Tensor2D h = RandomTensor2D(rng, rows, cols);
    const GroundTruthMask m = RandomMask(rng, rows, cols, 0.05 + 0.9 * (i % 10) / 10.0);
    worst = std::max(worst, std::abs(Rma(Heatmap(h), m).value - RmaOracle(h, m.values())));
  }
  const double secs = Seconds(start);
  const std::string detail = fmt::format("max |diff| = {:.3g}, {:.2f} s", worst, secs);
  if (worst > 1e-12 || secs >= 10.0) return Fail(detail);
  return {true, detail};
}

Outcome RmaScaleInvariance() {
  std::mt19937_64 rng(102);
  std::uniform_int_distribution<std::size_t> dim(1, 64);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t rows = dim(rng), cols = dim(rng);
    const Tensor2D h = RandomTensor2D(rng, rows, cols);
    const GroundTruthMask m = RandomMask(rng, rows, cols);
    const double base = Rma(Heatmap(h), m).value;
    for (double c : {1e-6, 1e6}) {
      Tensor2D scaled = h;
      for (double& v : scaled.mutable_data()) v *= c;
      worst = std::max(worst, std::abs(Rma(Heatmap(scaled), m).value - base));
    }
  }
  const std::string detail = fmt::format("max |diff| = {:.3g}", worst);
  return worst <= 1e-9 ? Outcome{true, detail} : Fail(detail);
}

Outcome TallyArithmetic() {
  const EvalSummary s = Summarize({6000, 1000, 2000, 1000});
  if (s.accuracy != 0.70) return Fail(fmt::format("accuracy {}", s.accuracy));
  if (!s.pt || std::abs(*s.pt - 6000.0 / 7000.0) > 1e-12) return Fail("pt");
  if (!s.ir || std::abs(*s.ir - 0.75) > 1e-12) return Fail("ir");
  const EvalSummary no_correct = Summarize({0, 0, 5, 5});
  const EvalSummary no_valid = Summarize({0, 5, 0, 5});
  if (no_correct.pt.has_value()) return Fail("pt defined with RR + RW = 0");
  if (no_valid.ir.has_value()) return Fail("ir defined with RR + WR = 0");
  return {true, "accuracy 0.7, pt 0.857142857, ir 0.75, degenerate tallies undefined"};
}

Outcome BoundaryRule() {
  const Heatmap h(Tensor2D({1, 2}, {1.0, 1.0}));
  const GroundTruthMask m(Tensor2D({1, 2}, {1.0, 0.0}));
  const double rma = Rma(h, m).value;
  if (rma != 0.5) return Fail(fmt::format("rma {}", rma));
  SampleScore s;
  s.prediction_correct = true;
  s.rma = rma;
  if (ClassifySample(s, kDefaultTheta) != Quadrant::kRR) return Fail("not RR");
  return {true, "rma 0.5 with correct prediction is RR"};
}

Outcome AttributionGolden() {
  const Tensor3D a({1, 2, 2}, {1, 0, 0, 1});
  const Tensor3D g({1, 2, 2}, {2, -1, 0, 3});
  const RelevanceMap hand = RelevanceSingleLayer(a, g);
  const std::vector<double> want = {2, 0, 0, 3};
  for (std::size_t i = 0; i < 4; ++i) {
    if (hand.values().data()[i] != want[i]) return Fail("hand example");
  }
  std::mt19937_64 rng(103);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Tensor3D ra = RandomAttention(rng, 4, 8);
    const Tensor3D rg = RandomTensor3D(rng, 4, 8, 8, -1.0, 1.0);
    const RelevanceMap r = RelevanceSingleLayer(ra, rg);
    const std::vector<double> oracle = TripleLoopRelevance(ra, rg, false);
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      worst = std::max(worst, std::abs(r.values().data()[i] - oracle[i]));
    }
  }
  const std::string detail = fmt::format("hand example exact, 4-head 8x8 max |diff| = {:.3g}", worst);
  return worst <= 1e-12 ? Outcome{true, detail} : Fail(detail);
}

int RunTool(const std::vector<std::string>& args, std::string* err_text = nullptr) {
  std::vector<const char*> argv = {"rateval"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = cli::RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (err_text) *err_text = err.str();
  return rc;
}

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome EndToEndPlanted() {
  const auto start = std::chrono::steady_clock::now();
  ScratchDir dir("acceptance");
  const std::vector<std::string> methods = {"ZS", "LP", "FLCP", "FT"};
  const std::vector<std::string> corruptions = {"blur", "noise", "fog", "jpeg"};

  // Distinct tally per group, each summing to at least 50.
  std::mt19937_64 rng(104);
  std::uniform_int_distribution<int> count(0, 20);
  std::map<GroupKey, QuadrantTally> planted;
  std::string groups_json;
  auto add_group = [&](const GroupKey& key) {
    QuadrantTally t{static_cast<std::uint64_t>(count(rng)), static_cast<std::uint64_t>(count(rng)),
                    static_cast<std::uint64_t>(count(rng)), static_cast<std::uint64_t>(count(rng))};
    t.rr += 50 - std::min<std::uint64_t>(50, t.total());
    planted[key] = t;
    if (!groups_json.empty()) groups_json += ",\n";
    groups_json += fmt::format(
        R"({{"method": "{}", "corruption": "{}", "severity": {}, "tally": [{}, {}, {}, {}]}})",
        key.method, key.corruption, key.severity, t.rr, t.rw, t.wr, t.ww);
  };
  for (const auto& m : methods) {
    add_group({m, "", 0});
    for (const auto& c : corruptions) {
      for (std::uint32_t sev = 1; sev <= 5; ++sev) add_group({m, c, sev});
    }
  }
  std::ofstream(dir / "spec.json")
      << "{\"seed\": 2024, \"width\": 16, \"height\": 16, \"groups\": [\n"
      << groups_json << "\n]}\n";

  std::string err;
  if (RunTool({"synth", "--spec", (dir / "spec.json").string(), "--out",
               (dir / "cohort").string()},
              &err) != 0) {
    return Fail("synth: " + err);
  }

  // Same samples, shuffled line order, next to the original manifest.
  std::vector<std::string> lines;
  {
    std::ifstream in(dir / "cohort" / "manifest.jsonl");
    for (std::string line; std::getline(in, line);) lines.push_back(line);
  }
  std::shuffle(lines.begin(), lines.end(), rng);
  {
    std::ofstream out(dir / "cohort" / "shuffled.jsonl");
    for (const auto& line : lines) out << line << "\n";
  }

  for (const char* name : {"manifest.jsonl", "shuffled.jsonl"}) {
    if (RunTool({"evaluate", "--workers", "1", "--manifest",
                 (dir / "cohort" / name).string(), "--out",
                 (dir / (std::string("run-") + name)).string()},
                &err) != 0) {
      return Fail(std::string("evaluate ") + name + ": " + err);
    }
  }
  const auto run_a = dir / "run-manifest.jsonl";
  const auto run_b = dir / "run-shuffled.jsonl";
  for (const char* report : {"report.csv", "report.json"}) {
    const std::string a = Slurp(run_a / report);
    if (a.empty() || a != Slurp(run_b / report)) {
      return Fail(std::string(report) + " differs between manifest orders");
    }
  }

  std::ifstream scores_in(run_a / "scores.jsonl");
  const GroupSummaries got = GroupAndSummarize(ParseScores(scores_in));
  if (got.size() != planted.size()) {
    return Fail(fmt::format("{} groups, expected {}", got.size(), planted.size()));
  }
  std::size_t samples = 0;
  for (const auto& [key, tally] : planted) {
    const auto it = got.find(key);
    if (it == got.end() || !(it->second.tally == tally)) {
      return Fail(fmt::format("tally mismatch in {}/{}/{}", key.method, key.corruption,
                              key.severity));
    }
    samples += tally.total();
  }
  const std::string csv = Slurp(run_a / "report.csv");
  if (static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) != planted.size() + 1) {
    return Fail("report.csv row count");
  }
  const double secs = Seconds(start);
  const std::string detail = fmt::format("{} groups, {} samples, all tallies exact, {:.2f} s",
                                         planted.size(), samples, secs);
  return secs < 60.0 ? Outcome{true, detail} : Fail(detail);
}

Outcome Monotonicity() {
  std::mt19937_64 rng(105);
  std::uniform_int_distribution<std::size_t> dim(2, 32);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  int transfers = 0;
  while (transfers < 1000) {
    const std::size_t rows = dim(rng), cols = dim(rng);
    const GroundTruthMask m = RandomMask(rng, rows, cols, 0.5);
    std::vector<std::size_t> inside, outside;
    for (std::size_t i = 0; i < rows * cols; ++i) {
      (m.values().data()[i] == 1.0 ? inside : outside).push_back(i);
    }
    if (inside.empty() || outside.empty()) continue;
    Tensor2D h = RandomTensor2D(rng, rows, cols);
    double before = Rma(Heatmap(h), m).value;
    for (int step = 0; step < 10; ++step, ++transfers) {
      const std::size_t from = outside[rng() % outside.size()];
      const std::size_t to = inside[rng() % inside.size()];
      const double moved = h.data()[from] * frac(rng);
      h.mutable_data()[from] -= moved;
      h.mutable_data()[to] += moved;
      const double after = Rma(Heatmap(h), m).value;
      if (after < before) {
        return Fail(fmt::format("rma dropped from {:.17g} to {:.17g}", before, after));
      }
      before = after;
    }
  }
  return {true, fmt::format("{} transfers, rma never decreased", transfers)};
}

Outcome NpyRoundTrip() {
  std::mt19937_64 rng(106);
  std::uniform_int_distribution<std::size_t> dim(1, 8);
  std::uniform_real_distribution<double> value(-1e3, 1e3);
  for (int i = 0; i < 10000; ++i) {
    const DType dtype = (i & 1) ? DType::kFloat64 : DType::kFloat32;
    auto fill = [&](auto& t) {
      for (double& v : t.mutable_data()) {
        const double x = value(rng);
        v = dtype == DType::kFloat32 ? static_cast<double>(static_cast<float>(x)) : x;
      }
    };
    const std::string bytes_str = [&] {
      if (i % 3 == 0) {
        Tensor3D t({dim(rng), dim(rng), dim(rng)}, dtype);
        fill(t);
        return SerializeNpy(t);
      }
      Tensor2D t({dim(rng), dim(rng)}, dtype);
      fill(t);
      return SerializeNpy(t);
    }();
    std::vector<std::byte> bytes(bytes_str.size());
    std::memcpy(bytes.data(), bytes_str.data(), bytes.size());
    const AnyTensor back = ParseNpy(bytes);
    const std::string again =
        std::visit([](const auto& t) { return SerializeNpy(t); }, back);
    if (again != bytes_str) return Fail(fmt::format("tensor {} not bit-exact", i));
  }
  return {true, "10000 tensors (rank 2/3, f4/f8) bit-exact"};
}

}  // namespace
}  // namespace rateval

int main() {
  using rateval::Outcome;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"rma-oracle-equivalence", rateval::RmaOracleEquivalence},
      {"rma-scale-invariance", rateval::RmaScaleInvariance},
      {"tally-arithmetic", rateval::TallyArithmetic},
      {"validity-boundary", rateval::BoundaryRule},
      {"attribution-golden", rateval::AttributionGolden},
      {"end-to-end-planted-cohort", rateval::EndToEndPlanted},
      {"rma-monotonicity", rateval::Monotonicity},
      {"npy-round-trip", rateval::NpyRoundTrip},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
