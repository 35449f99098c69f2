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

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "codofuzz/coverage.h"
#include "codofuzz/error.h"
#include "codofuzz/evaluation.h"
#include "codofuzz/rng.h"
#include "codofuzz/transforms.h"

namespace codofuzz {
namespace {

constexpr size_t kBatch = 256;

std::vector<Prediction> PredictAll(OracleClient& oracle, const std::vector<ImageTensor>& images) {
  std::vector<Prediction> out;
  out.reserve(images.size());
  for (size_t start = 0; start < images.size(); start += kBatch) {
    const size_t n = std::min(kBatch, images.size() - start);
    auto batch = PredictBatch(oracle, std::span(images).subspan(start, n));
    for (auto& p : batch) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

void to_json(nlohmann::json& j, const RotationRow& r) {
  j = nlohmann::json{{"max_degrees", r.max_degrees},
                     {"n_inputs", r.n_inputs},
                     {"n_selected", r.n_selected},
                     {"n_selected_errors", r.n_selected_errors},
                     {"cdc_achieved", r.cdc_achieved},
                     {"accuracy", r.accuracy}};
}

std::vector<RotationRow> RotationCorrelation(const Dataset& test_set, OracleClient& oracle,
                                             const RotationOptions& options) {
  const auto& degrees = options.degrees;
  if (degrees.empty() || degrees.front() != 0.0) {
    throw Error(ErrorCode::kConfig, "rotation degrees must start at 0");
  }
  for (size_t i = 1; i < degrees.size(); ++i) {
    if (!(degrees[i] > degrees[i - 1])) {
      throw Error(ErrorCode::kConfig, "rotation degrees must be strictly ascending");
    }
  }
  if (degrees.back() > 180.0) throw Error(ErrorCode::kConfig, "rotation degrees must be <= 180");
  if (test_set.items.empty()) throw Error(ErrorCode::kData, "empty test set");
  const int n_classes = oracle.n_classes();
  for (const LabeledImage& item : test_set.items) {
    if (item.label < 0 || item.label >= n_classes) {
      throw Error(ErrorCode::kData, "label " + std::to_string(item.label) +
                                        " outside the oracle's " + std::to_string(n_classes) +
                                        " classes");
    }
  }

  const size_t n = test_set.items.size();
  Rng order_rng(DeriveSeed(options.rng_seed, "rotation-order"));
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (size_t i = n; i > 1; --i) std::swap(order[i - 1], order[order_rng.UniformIndex(i)]);
  Rng angle_rng(DeriveSeed(options.rng_seed, "rotation-angle"));
  std::vector<double> direction(n);
  for (double& w : direction) w = angle_rng.Uniform(-1.0, 1.0);

  std::vector<RotationRow> rows;
  for (double u : degrees) {
    TransformRanges ranges;
    ranges.rotation_max_degrees = std::max(u, ranges.rotation_max_degrees);
    std::vector<ImageTensor> images;
    images.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      const ImageTensor& image = test_set.items[i].image;
      if (u == 0.0) {
        images.push_back(image);
      } else {
        images.push_back(
            Quantize(ApplyTransform(image, RotationParams{u * direction[i]}, ranges)));
      }
    }
    const std::vector<Prediction> predictions = PredictAll(oracle, images);

    RotationRow row;
    row.max_degrees = u;
    row.n_inputs = static_cast<int64_t>(n);
    int64_t correct = 0;
    for (size_t i = 0; i < n; ++i) {
      correct += predictions[i].output.predicted_class == test_set.items[i].label;
    }
    row.accuracy = static_cast<double>(correct) / static_cast<double>(n);

    CoverageMatrix coverage(n_classes, options.n_bins, options.cap);
    for (size_t i : order) {
      if (!coverage.Update(predictions[i].output)) continue;
      ++row.n_selected;
      row.n_selected_errors += predictions[i].output.predicted_class != test_set.items[i].label;
    }
    row.cdc_achieved = coverage.CdcScore(options.exclude_infeasible);
    rows.push_back(row);
  }
  return rows;
}

std::string RotationCsv(const std::vector<RotationRow>& rows) {
  std::string out = "max_degrees,n_inputs,n_selected,n_selected_errors,cdc_achieved,accuracy\n";
  char buf[256];
  for (const RotationRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%lld,%lld,%lld,%.17g,%.17g\n", r.max_degrees,
                  static_cast<long long>(r.n_inputs), static_cast<long long>(r.n_selected),
                  static_cast<long long>(r.n_selected_errors), r.cdc_achieved, r.accuracy);
    out += buf;
  }
  return out;
}

}  // namespace codofuzz
