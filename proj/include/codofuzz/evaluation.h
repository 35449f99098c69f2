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

#ifndef CODOFUZZ_EVALUATION_H_
#define CODOFUZZ_EVALUATION_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "codofuzz/dataset.h"
#include "codofuzz/oracle.h"
#include "codofuzz/test_input.h"
#include "json.hpp"

namespace codofuzz {

// Suite quality metrics. The per-input functions require a prediction on
// every input and raise kData otherwise.

// Inputs whose predicted class differs from the ground truth.
int64_t MisclassifiedCount(std::span<const TestInput> inputs);

// -sum p ln p, with 0 ln 0 = 0.
double PredictiveEntropy(std::span<const double> probs);

// Mean predictive entropy in nats. Throws kData on an empty suite.
double AvgEntropy(std::span<const TestInput> inputs);

// Entropy of the predicted-class histogram divided by ln(n_classes), in
// [0, 1]. Throws kData on an empty suite or n_classes < 2.
double OutputImpartiality(std::span<const TestInput> inputs, int n_classes);

// Ordered (ground truth, predicted) pairs with the two unequal.
std::set<std::pair<int, int>> ErrorTypes(std::span<const TestInput> inputs);
int DistinctErrorTypes(std::span<const TestInput> inputs);

// Number of distinct predicted classes; 0 for an empty suite.
int DistinctClasses(std::span<const TestInput> inputs);

struct SuiteMetrics {
  std::string name;
  int n_classes = 0;
  int64_t n_inputs = 0;
  int64_t n_misclassified = 0;
  // Undefined (null in JSON, empty in CSV) for an empty suite.
  std::optional<double> avg_entropy;
  std::optional<double> output_impartiality;
  int distinct_classes = 0;
  int distinct_error_types = 0;
  std::vector<std::pair<int, int>> error_types;

  friend bool operator==(const SuiteMetrics&, const SuiteMetrics&) = default;
};

void to_json(nlohmann::json& j, const SuiteMetrics& m);
void from_json(const nlohmann::json& j, SuiteMetrics& m);

SuiteMetrics ComputeMetrics(std::string name, std::span<const TestInput> inputs,
                            int n_classes);

// Counts split by whether the input is correctly classified.
struct SplitCount {
  int64_t correct = 0;
  int64_t misclassified = 0;

  friend bool operator==(const SplitCount&, const SplitCount&) = default;
};

struct SuiteHistograms {
  // 20 equal-width confidence bins over [0, 1]; 1.0 falls in the last.
  std::vector<SplitCount> confidence;
  // One entry per predicted class.
  std::vector<SplitCount> predicted_class;
  // Row-major n_classes x n_bins occupancy by (predicted class, bin).
  int n_bins = 0;
  std::vector<SplitCount> cells;
};

inline constexpr int kConfidenceHistogramBins = 20;

SuiteHistograms ComputeHistograms(std::span<const TestInput> inputs,
                                  int n_classes, int n_bins);

// "suite,n_inputs,n_misclassified,avg_entropy,output_impartiality,
// distinct_classes,distinct_error_types" plus one row per suite.
std::string MetricsCsv(const std::vector<SuiteMetrics>& metrics);
std::string ConfidenceHistogramCsv(const SuiteHistograms& h);
std::string ClassHistogramCsv(const SuiteHistograms& h);
std::string CellGridCsv(const SuiteHistograms& h);

// Writes metrics.json, metrics.csv and, for suite i, suite<i>_confidence.csv,
// suite<i>_classes.csv and suite<i>_cells.csv. Throws kIo naming the path.
void EmitReport(const std::filesystem::path& out_dir,
                const std::vector<SuiteMetrics>& metrics,
                const std::vector<SuiteHistograms>& histograms);

std::vector<SuiteMetrics> ReadMetricsJson(const std::filesystem::path& path);

// Rotation harness.
struct RotationRow {
  double max_degrees = 0.0;
  int64_t n_inputs = 0;
  int64_t n_selected = 0;
  int64_t n_selected_errors = 0;
  double cdc_achieved = 0.0;
  double accuracy = 0.0;

  friend bool operator==(const RotationRow&, const RotationRow&) = default;
};

void to_json(nlohmann::json& j, const RotationRow& r);

struct RotationOptions {
  // Ascending, starting at 0.
  std::vector<double> degrees{0.0, 5.0, 10.0, 15.0};
  int n_bins = 10;
  int cap = 10;
  bool exclude_infeasible = true;
  uint64_t rng_seed = 0;
};

// For each u, rotates image i by u * w_i with w_i ~ U[-1, 1] drawn once per
// image, so every u sees the same directions. The rotated set is streamed
// in one fixed shuffled order through a fresh coverage matrix; the selected
// subset is the inputs whose update succeeded. Streams: DeriveSeed(seed,
// "rotation-order") and "rotation-angle".
// Throws kConfig on bad degrees and kData on labels outside the oracle's
// classes or an empty test set.
std::vector<RotationRow> RotationCorrelation(const Dataset& test_set,
                                             OracleClient& oracle,
                                             const RotationOptions& options);

std::string RotationCsv(const std::vector<RotationRow>& rows);

}  // namespace codofuzz

#endif  // CODOFUZZ_EVALUATION_H_
