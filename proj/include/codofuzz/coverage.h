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

#ifndef CODOFUZZ_COVERAGE_H_
#define CODOFUZZ_COVERAGE_H_

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"

namespace codofuzz {

// Tolerance on the probability simplex (entries sum to 1).
inline constexpr double kSimplexTolerance = 1e-5;
// Slack allowed on confidence bounds ([0,1] and the 1/N floor).
inline constexpr double kConfidenceSlack = 1e-9;

// A point of the classifier's co-domain: the argmax class, its probability,
// and the full probability vector it was derived from.
struct OutputTuple {
  int predicted_class = 0;
  double confidence = 0.0;
  std::vector<double> prob_vector;

  int n_classes() const { return static_cast<int>(prob_vector.size()); }

  friend bool operator==(const OutputTuple&, const OutputTuple&) = default;
};

// Builds the tuple from a probability vector; argmax ties break to the
// lowest index. Throws kInput unless the vector has >= 2 finite nonnegative
// entries summing to 1 within kSimplexTolerance.
OutputTuple MakeOutputTuple(std::span<const double> prob_vector);

// Column of the confidence bin: floor(confidence * n_bins), with exactly 1.0
// clamped into the last bin. Throws kInput for confidence outside
// [0, 1] beyond kConfidenceSlack, or n_bins < 1.
int BinIndex(double confidence, int n_bins);

struct Cell {
  int row = 0;
  int col = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

// Number of leading columns per row that no argmax probability can reach:
// floor(n_bins / n_classes).
int InfeasibleColumns(int n_classes, int n_bins);

// Every unreachable cell, row-major.
std::vector<Cell> InfeasibleCells(int n_classes, int n_bins);

struct CoverageSnapshot {
  int n_classes = 0;
  int n_bins = 0;
  int cap = 0;
  bool exclude_infeasible = true;
  std::vector<int> counts;  // row-major n_classes x n_bins
  double cdc = 0.0;
  double kcdc = 0.0;
  int64_t iteration = 0;

  friend bool operator==(const CoverageSnapshot&,
                         const CoverageSnapshot&) = default;
};

void to_json(nlohmann::json& j, const CoverageSnapshot& s);
void from_json(const nlohmann::json& j, CoverageSnapshot& s);

// The class x confidence-bin grid. Each cell admits at most `cap` inputs,
// first come first served. Counts are exact integers; scores are recomputed
// from them on every query.
//
// Not internally synchronized: one writer, readers only between updates.
class CoverageMatrix {
 public:
  // Throws kConfig unless n_classes >= 2, n_bins >= 1 and cap >= 1.
  CoverageMatrix(int n_classes, int n_bins, int cap);

  // Maps `out` to (predicted_class, bin) and increments the cell if it is
  // below cap. Returns whether the cell was incremented. A confidence within
  // kConfidenceSlack below 1/N lands in the first feasible column.
  // Throws kInput for a class outside [0, N) or a confidence below 1/N
  // (not an argmax probability).
  bool Update(const OutputTuple& out);

  // Cell the tuple would be assigned to, without mutating.
  Cell CellFor(const OutputTuple& out) const;

  int n_classes() const { return n_classes_; }
  int n_bins() const { return n_bins_; }
  int cap() const { return cap_; }
  int64_t total_assigned() const { return total_assigned_; }

  int count(int row, int col) const { return counts_[Offset(row, col)]; }
  std::span<const int> counts() const { return counts_; }

  int64_t OccupiedCells() const;
  // N*M, or N*M - N*floor(M/N) when excluding the infeasible region.
  int64_t DenominatorCells(bool exclude_infeasible) const;

  double CdcScore(bool exclude_infeasible = true) const;
  double KcdcScore(bool exclude_infeasible = true) const;

  CoverageSnapshot Snapshot(int64_t iteration,
                            bool exclude_infeasible = true) const;
  // Throws kData if the snapshot violates a matrix invariant.
  static CoverageMatrix FromSnapshot(const CoverageSnapshot& snapshot);

  friend bool operator==(const CoverageMatrix&,
                         const CoverageMatrix&) = default;

 private:
  size_t Offset(int row, int col) const {
    return static_cast<size_t>(row) * n_bins_ + col;
  }

  int n_classes_;
  int n_bins_;
  int cap_;
  std::vector<int> counts_;
  int64_t total_assigned_ = 0;
};

}  // namespace codofuzz

#endif  // CODOFUZZ_COVERAGE_H_
