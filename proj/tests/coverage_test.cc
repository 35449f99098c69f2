// Copyright 2026 The CoDoFuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "codofuzz/coverage.h"

#include <cmath>
#include <map>
#include <random>
#include <thread>
#include <utility>
#include <vector>

#include "codofuzz/error.h"
#include "gtest/gtest.h"
#include "json.hpp"

namespace codofuzz {
namespace {

// Reference binner written independently of BinIndex: extended precision
// floor, explicit clamp of the closed right endpoint.
int ReferenceBin(double confidence, int n_bins) {
  const long double scaled = static_cast<long double>(confidence) * n_bins;
  long long bin = static_cast<long long>(std::floor(scaled));
  if (bin >= n_bins) bin = n_bins - 1;
  if (bin < 0) bin = 0;
  return static_cast<int>(bin);
}

std::vector<double> RandomSimplexPoint(int n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> temp(0.0, 12.0);
  const double t = temp(gen);
  std::vector<double> logits(n);
  for (double& z : logits) z = t * u(gen);
  double mx = logits[0];
  for (double z : logits) mx = std::max(mx, z);
  double sum = 0.0;
  for (double& z : logits) {
    z = std::exp(z - mx);
    sum += z;
  }
  for (double& z : logits) z /= sum;
  return logits;
}

OutputTuple Tuple(int cls, double conf, int n) {
  OutputTuple out;
  out.predicted_class = cls;
  out.confidence = conf;
  out.prob_vector.assign(n, (1.0 - conf) / (n - 1));
  out.prob_vector[cls] = conf;
  return out;
}

TEST(CoverageMatrixTest, NewMatrixIsZeroed) {
  CoverageMatrix a(10, 100, 10);
  EXPECT_EQ(a.counts().size(), 1000u);
  EXPECT_EQ(a.cap(), 10);
  EXPECT_EQ(a.total_assigned(), 0);
  for (int c : a.counts()) EXPECT_EQ(c, 0);

  CoverageMatrix b(100, 10, 10);
  EXPECT_EQ(b.counts().size(), 1000u);

  CoverageMatrix c(2, 1, 1);
  EXPECT_EQ(c.counts().size(), 2u);
}

TEST(CoverageMatrixTest, RejectsBadConfiguration) {
  for (auto [n, m, k] : {std::tuple{1, 10, 1}, std::tuple{2, 0, 1},
                         std::tuple{2, 10, 0}, std::tuple{0, -1, -1}}) {
    try {
      CoverageMatrix bad(n, m, k);
      FAIL() << "accepted " << n << "," << m << "," << k;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kConfig);
    }
  }
}

TEST(BinIndexTest, WorkedExamples) {
  EXPECT_EQ(BinIndex(0.689, 10), 6);
  EXPECT_EQ(BinIndex(1.0, 10), 9);
  EXPECT_EQ(BinIndex(0.0, 100), 0);
  EXPECT_EQ(BinIndex(0.61, 10), 6);
  EXPECT_EQ(BinIndex(0.69, 10), 6);
}

TEST(BinIndexTest, RejectsOutOfRange) {
  EXPECT_THROW(BinIndex(-0.01, 10), Error);
  EXPECT_THROW(BinIndex(1.01, 10), Error);
  EXPECT_THROW(BinIndex(std::nan(""), 10), Error);
  EXPECT_THROW(BinIndex(0.5, 0), Error);
  // Inside the slack: clamped.
  EXPECT_EQ(BinIndex(1.0 + 1e-12, 10), 9);
  EXPECT_EQ(BinIndex(-1e-12, 10), 0);
}

TEST(BinIndexTest, MatchesReferenceOnRandomDraws) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> m(1, 1000);
  for (int i = 0; i < 10000; ++i) {
    const double c = u(gen);
    const int bins = m(gen);
    ASSERT_EQ(BinIndex(c, bins), ReferenceBin(c, bins)) << c << " " << bins;
  }
}

TEST(BinIndexTest, PartitionsUnitInterval) {
  // Bins are nondecreasing in confidence, step by at most one, and every
  // bin is hit; 1.0 closes the last bin.
  for (int m : {1, 3, 7, 10, 100}) {
    int last = 0;
    std::vector<bool> hit(m, false);
    for (int i = 0; i <= 200000; ++i) {
      const double c = i / 200000.0;
      const int b = BinIndex(c, m);
      ASSERT_GE(b, last);
      ASSERT_LE(b, last + 1);
      hit[b] = true;
      last = b;
    }
    EXPECT_EQ(last, m - 1);
    for (int b = 0; b < m; ++b) EXPECT_TRUE(hit[b]) << m << " " << b;
  }
}

TEST(CoverageMatrixTest, UpdateWorkedExample) {
  CoverageMatrix cov(10, 10, 10);
  EXPECT_TRUE(cov.Update(Tuple(9, 0.689, 10)));
  EXPECT_EQ(cov.count(9, 6), 1);
  EXPECT_EQ(cov.total_assigned(), 1);
}

TEST(CoverageMatrixTest, CapSaturation) {
  const int k = 4;
  CoverageMatrix cov(10, 10, k);
  const OutputTuple out = Tuple(9, 0.689, 10);
  for (int i = 0; i < k; ++i) EXPECT_TRUE(cov.Update(out));
  const auto before = std::vector<int>(cov.counts().begin(), cov.counts().end());
  EXPECT_FALSE(cov.Update(out));
  EXPECT_EQ(std::vector<int>(cov.counts().begin(), cov.counts().end()), before);
  EXPECT_EQ(cov.total_assigned(), k);
}

TEST(CoverageMatrixTest, SameBinDifferentConfidence) {
  CoverageMatrix cov(10, 10, 1);
  EXPECT_TRUE(cov.Update(Tuple(3, 0.61, 10)));
  EXPECT_FALSE(cov.Update(Tuple(3, 0.69, 10)));
  EXPECT_EQ(cov.count(3, 6), 1);
}

TEST(CoverageMatrixTest, UpdateRejectsBadClass) {
  CoverageMatrix cov(3, 10, 1);
  OutputTuple out = Tuple(2, 0.9, 3);
  out.predicted_class = 3;
  EXPECT_THROW(cov.Update(out), Error);
  out.predicted_class = -1;
  EXPECT_THROW(cov.Update(out), Error);
}

TEST(CoverageMatrixTest, UpdateRejectsSubArgmaxConfidence) {
  CoverageMatrix cov(4, 8, 1);
  EXPECT_THROW(cov.Update(Tuple(0, 0.2, 4)), Error);
}

TEST(CoverageMatrixTest, ExactFloorConfidenceLandsOnFirstFeasibleColumn) {
  // 1/N with M/N integral sits exactly on the first feasible edge.
  CoverageMatrix cov(10, 100, 1);
  EXPECT_EQ(cov.CellFor(Tuple(0, 0.1, 10)).col, 10);
  CoverageMatrix uniform3(3, 3, 1);
  OutputTuple third = MakeOutputTuple(std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3});
  EXPECT_EQ(third.predicted_class, 0);
  EXPECT_EQ(uniform3.CellFor(third).col, 1);
  // A confidence a hair under 1/N (within slack) still lands feasibly.
  OutputTuple shy = Tuple(1, 0.25 - 1e-12, 4);
  CoverageMatrix four(4, 8, 1);
  EXPECT_EQ(four.CellFor(shy).col, 2);
}

TEST(ScoreTest, EmptyMatrixScoresZero) {
  CoverageMatrix cov(10, 100, 10);
  EXPECT_EQ(cov.CdcScore(true), 0.0);
  EXPECT_EQ(cov.CdcScore(false), 0.0);
  EXPECT_EQ(cov.KcdcScore(true), 0.0);
  EXPECT_EQ(cov.KcdcScore(false), 0.0);
}

TEST(ScoreTest, FullFeasibleRegion) {
  CoverageMatrix cov(10, 100, 2);
  for (int r = 0; r < 10; ++r) {
    for (int c = 10; c < 100; ++c) {
      const double conf = (c + 0.5) / 100.0;
      EXPECT_TRUE(cov.Update(Tuple(r, conf, 10)));
      EXPECT_TRUE(cov.Update(Tuple(r, conf, 10)));
    }
  }
  EXPECT_EQ(cov.CdcScore(true), 1.0);
  EXPECT_EQ(cov.CdcScore(false), 0.9);
  EXPECT_EQ(cov.KcdcScore(true), 1.0);
  EXPECT_DOUBLE_EQ(cov.KcdcScore(false), 0.9);
}

TEST(ScoreTest, SingleCellDirectFormulas) {
  CoverageMatrix cov(2, 2, 3);
  for (int i = 0; i < 3; ++i) cov.Update(Tuple(0, 0.9, 2));
  EXPECT_EQ(cov.CdcScore(false), 0.25);
  EXPECT_EQ(cov.KcdcScore(false), 0.25);
}

TEST(InfeasibleTest, Regions) {
  const auto a = InfeasibleCells(10, 100);
  EXPECT_EQ(a.size(), 100u);
  for (const Cell& cell : a) EXPECT_LE(cell.col, 9);
  std::map<int, int> per_row;
  for (const Cell& cell : a) ++per_row[cell.row];
  EXPECT_EQ(per_row.size(), 10u);
  for (auto [row, n] : per_row) EXPECT_EQ(n, 10) << row;

  const auto b = InfeasibleCells(10, 10);
  EXPECT_EQ(b.size(), 10u);
  for (const Cell& cell : b) EXPECT_EQ(cell.col, 0);

  EXPECT_TRUE(InfeasibleCells(100, 10).empty());
}

// Replays random tuples through the matrix and a map-backed reference.
TEST(CoveragePropertyTest, BruteForceEquivalenceAndMonotoneScores) {
  std::mt19937_64 gen(2024);
  for (auto [n, m, k] : {std::tuple{10, 10, 3}, std::tuple{3, 20, 2},
                         std::tuple{10, 100, 1}, std::tuple{4, 3, 5}}) {
    CoverageMatrix cov(n, m, k);
    std::map<std::pair<int, int>, int> reference;
    int accepted = 0;
    double last_cdc = 0.0, last_kcdc = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const auto probs = RandomSimplexPoint(n, gen);
      const OutputTuple out = MakeOutputTuple(probs);
      // Reference cell: first maximal entry, floor bin, clamped.
      int cls = 0;
      for (int j = 1; j < n; ++j) {
        if (probs[j] > probs[cls]) cls = j;
      }
      const int col = std::max(ReferenceBin(probs[cls], m), m / n);
      int& slot = reference[{cls, col}];
      const bool expect = slot < k;
      if (expect) ++slot;

      const bool got = cov.Update(out);
      ASSERT_EQ(got, expect) << "step " << i;
      accepted += got;

      const double cdc = cov.CdcScore();
      const double kcdc = cov.KcdcScore();
      ASSERT_GE(cdc, last_cdc);
      ASSERT_GE(kcdc, last_kcdc);
      last_cdc = cdc;
      last_kcdc = kcdc;
    }
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < m; ++c) {
        auto it = reference.find({r, c});
        ASSERT_EQ(cov.count(r, c), it == reference.end() ? 0 : it->second);
        ASSERT_LE(cov.count(r, c), k);
        if (c < m / n) ASSERT_EQ(cov.count(r, c), 0);
      }
    }
    EXPECT_EQ(cov.total_assigned(), accepted);
    EXPECT_NEAR(cov.KcdcScore() * cov.DenominatorCells(true) * k, accepted,
                1e-6);
  }
}

TEST(CoveragePropertyTest, LargerCapDominatesCellwise) {
  std::mt19937_64 gen(99);
  CoverageMatrix small(5, 10, 2);
  CoverageMatrix large(5, 10, 3);
  for (int i = 0; i < 2000; ++i) {
    const OutputTuple out = MakeOutputTuple(RandomSimplexPoint(5, gen));
    small.Update(out);
    large.Update(out);
  }
  for (size_t i = 0; i < small.counts().size(); ++i) {
    EXPECT_LE(small.counts()[i], large.counts()[i]);
  }
}

TEST(SnapshotTest, JsonRoundTripIsLossless) {
  std::mt19937_64 gen(5);
  CoverageMatrix cov(4, 9, 2);
  for (int i = 0; i < 50; ++i) cov.Update(MakeOutputTuple(RandomSimplexPoint(4, gen)));
  const CoverageSnapshot snap = cov.Snapshot(123);
  const std::string text = nlohmann::json(snap).dump();
  const auto back = nlohmann::json::parse(text).get<CoverageSnapshot>();
  EXPECT_EQ(back, snap);
  const CoverageMatrix restored = CoverageMatrix::FromSnapshot(back);
  EXPECT_EQ(restored, cov);
  EXPECT_EQ(restored.CdcScore(), snap.cdc);
  EXPECT_EQ(restored.KcdcScore(), snap.kcdc);

  const nlohmann::json j = snap;
  for (const char* key : {"n_classes", "n_bins", "cap", "counts", "cdc", "kcdc",
                          "iteration"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
}

TEST(SnapshotTest, RejectsInvariantViolations) {
  CoverageSnapshot snap = CoverageMatrix(2, 4, 1).Snapshot(0);
  snap.counts[0] = 1;  // infeasible column
  EXPECT_THROW(CoverageMatrix::FromSnapshot(snap), Error);
  snap.counts[0] = 0;
  snap.counts[3] = 2;  // over cap
  EXPECT_THROW(CoverageMatrix::FromSnapshot(snap), Error);
}

TEST(CoverageMatrixTest, TransferableAcrossThreads) {
  CoverageMatrix cov(3, 6, 2);
  std::thread worker([&cov] { cov.Update(Tuple(1, 0.8, 3)); });
  worker.join();
  CoverageMatrix moved = std::move(cov);
  EXPECT_EQ(moved.total_assigned(), 1);
}

TEST(OutputTupleTest, ValidatesSimplex) {
  EXPECT_THROW(MakeOutputTuple(std::vector<double>{0.5}), Error);
  EXPECT_THROW(MakeOutputTuple(std::vector<double>{0.5, 0.6}), Error);
  EXPECT_THROW(MakeOutputTuple(std::vector<double>{1.2, -0.2}), Error);
  const OutputTuple t = MakeOutputTuple(std::vector<double>{0.25, 0.5, 0.25});
  EXPECT_EQ(t.predicted_class, 1);
  EXPECT_EQ(t.confidence, 0.5);
  const OutputTuple tie = MakeOutputTuple(std::vector<double>{0.4, 0.4, 0.2});
  EXPECT_EQ(tie.predicted_class, 0);
}

}  // namespace
}  // namespace codofuzz
