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
#include <string>

#include "codofuzz/error.h"

namespace codofuzz {

OutputTuple MakeOutputTuple(std::span<const double> prob_vector) {
  if (prob_vector.size() < 2) {
    throw Error(ErrorCode::kInput, "probability vector needs >= 2 entries");
  }
  double sum = 0.0;
  size_t best = 0;
  for (size_t i = 0; i < prob_vector.size(); ++i) {
    const double p = prob_vector[i];
    if (!std::isfinite(p) || p < 0.0) {
      throw Error(ErrorCode::kInput, "probability " + std::to_string(i) +
                                         " is negative or not finite");
    }
    sum += p;
    if (p > prob_vector[best]) best = i;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    throw Error(ErrorCode::kInput,
                "probabilities sum to " + std::to_string(sum) + ", not 1");
  }
  OutputTuple out;
  out.predicted_class = static_cast<int>(best);
  out.confidence = prob_vector[best];
  out.prob_vector.assign(prob_vector.begin(), prob_vector.end());
  return out;
}

int BinIndex(double confidence, int n_bins) {
  if (n_bins < 1) throw Error(ErrorCode::kInput, "n_bins must be >= 1");
  if (!(confidence >= -kConfidenceSlack && confidence <= 1.0 + kConfidenceSlack)) {
    throw Error(ErrorCode::kInput,
                "confidence " + std::to_string(confidence) + " outside [0,1]");
  }
  if (confidence <= 0.0) return 0;
  if (confidence >= 1.0) return n_bins - 1;
  const int bin = static_cast<int>(std::floor(confidence * n_bins));
  return bin < n_bins ? bin : n_bins - 1;
}

int InfeasibleColumns(int n_classes, int n_bins) {
  return n_classes > 0 ? n_bins / n_classes : 0;
}

std::vector<Cell> InfeasibleCells(int n_classes, int n_bins) {
  std::vector<Cell> cells;
  const int cols = InfeasibleColumns(n_classes, n_bins);
  cells.reserve(static_cast<size_t>(n_classes) * cols);
  for (int r = 0; r < n_classes; ++r) {
    for (int c = 0; c < cols; ++c) cells.push_back({r, c});
  }
  return cells;
}

CoverageMatrix::CoverageMatrix(int n_classes, int n_bins, int cap)
    : n_classes_(n_classes), n_bins_(n_bins), cap_(cap) {
  if (n_classes < 2) throw Error(ErrorCode::kConfig, "n_classes must be >= 2");
  if (n_bins < 1) throw Error(ErrorCode::kConfig, "n_bins must be >= 1");
  if (cap < 1) throw Error(ErrorCode::kConfig, "cap must be >= 1");
  counts_.assign(static_cast<size_t>(n_classes) * n_bins, 0);
}

Cell CoverageMatrix::CellFor(const OutputTuple& out) const {
  if (out.predicted_class < 0 || out.predicted_class >= n_classes_) {
    throw Error(ErrorCode::kInput,
                "class " + std::to_string(out.predicted_class) +
                    " outside [0," + std::to_string(n_classes_) + ")");
  }
  if (out.confidence < 1.0 / n_classes_ - kConfidenceSlack) {
    throw Error(ErrorCode::kInput, "confidence " +
                                       std::to_string(out.confidence) +
                                       " below 1/N; not an argmax probability");
  }
  int col = BinIndex(out.confidence, n_bins_);
  const int first_feasible = InfeasibleColumns(n_classes_, n_bins_);
  if (col < first_feasible) col = first_feasible;
  return {out.predicted_class, col};
}

bool CoverageMatrix::Update(const OutputTuple& out) {
  const Cell cell = CellFor(out);
  int& slot = counts_[Offset(cell.row, cell.col)];
  if (slot >= cap_) return false;
  ++slot;
  ++total_assigned_;
  return true;
}

int64_t CoverageMatrix::OccupiedCells() const {
  int64_t occupied = 0;
  for (int c : counts_) occupied += c > 0;
  return occupied;
}

int64_t CoverageMatrix::DenominatorCells(bool exclude_infeasible) const {
  const int64_t all = static_cast<int64_t>(n_classes_) * n_bins_;
  if (!exclude_infeasible) return all;
  return all - static_cast<int64_t>(n_classes_) *
                   InfeasibleColumns(n_classes_, n_bins_);
}

double CoverageMatrix::CdcScore(bool exclude_infeasible) const {
  return static_cast<double>(OccupiedCells()) /
         static_cast<double>(DenominatorCells(exclude_infeasible));
}

double CoverageMatrix::KcdcScore(bool exclude_infeasible) const {
  return static_cast<double>(total_assigned_) /
         (static_cast<double>(DenominatorCells(exclude_infeasible)) * cap_);
}

CoverageSnapshot CoverageMatrix::Snapshot(int64_t iteration,
                                          bool exclude_infeasible) const {
  CoverageSnapshot s;
  s.n_classes = n_classes_;
  s.n_bins = n_bins_;
  s.cap = cap_;
  s.exclude_infeasible = exclude_infeasible;
  s.counts = counts_;
  s.cdc = CdcScore(exclude_infeasible);
  s.kcdc = KcdcScore(exclude_infeasible);
  s.iteration = iteration;
  return s;
}

CoverageMatrix CoverageMatrix::FromSnapshot(const CoverageSnapshot& snapshot) {
  CoverageMatrix m(snapshot.n_classes, snapshot.n_bins, snapshot.cap);
  if (snapshot.counts.size() != m.counts_.size()) {
    throw Error(ErrorCode::kData, "snapshot counts have wrong length");
  }
  const int infeasible = InfeasibleColumns(m.n_classes_, m.n_bins_);
  for (int r = 0; r < m.n_classes_; ++r) {
    for (int c = 0; c < m.n_bins_; ++c) {
      const int v = snapshot.counts[m.Offset(r, c)];
      if (v < 0 || v > m.cap_ || (c < infeasible && v != 0)) {
        throw Error(ErrorCode::kData, "snapshot cell (" + std::to_string(r) +
                                          "," + std::to_string(c) +
                                          ") violates cap or feasibility");
      }
      m.counts_[m.Offset(r, c)] = v;
      m.total_assigned_ += v;
    }
  }
  return m;
}

void to_json(nlohmann::json& j, const CoverageSnapshot& s) {
  j = nlohmann::json{{"n_classes", s.n_classes},
                     {"n_bins", s.n_bins},
                     {"cap", s.cap},
                     {"exclude_infeasible", s.exclude_infeasible},
                     {"counts", s.counts},
                     {"cdc", s.cdc},
                     {"kcdc", s.kcdc},
                     {"iteration", s.iteration}};
}

void from_json(const nlohmann::json& j, CoverageSnapshot& s) {
  try {
    s.n_classes = j.at("n_classes").get<int>();
    s.n_bins = j.at("n_bins").get<int>();
    s.cap = j.at("cap").get<int>();
    s.exclude_infeasible = j.value("exclude_infeasible", true);
    s.counts = j.at("counts").get<std::vector<int>>();
    s.cdc = j.at("cdc").get<double>();
    s.kcdc = j.at("kcdc").get<double>();
    s.iteration = j.at("iteration").get<int64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("coverage snapshot: ") + e.what());
  }
}

}  // namespace codofuzz
