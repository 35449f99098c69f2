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

#include "codofuzz/oracle.h"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "codofuzz/error.h"

namespace codofuzz {
namespace {

void CheckShape(const OracleClient& oracle, const ImageTensor& image) {
  if (image.shape() != oracle.input_shape()) {
    throw Error(ErrorCode::kInput, "image shape " + image.shape().ToString() +
                                       " does not match model input " +
                                       oracle.input_shape().ToString());
  }
}

Prediction ToPrediction(const OracleClient& oracle, std::vector<double> probs,
                        int64_t latency_us) {
  if (static_cast<int>(probs.size()) != oracle.n_classes()) {
    throw Error(ErrorCode::kData,
                "oracle returned " + std::to_string(probs.size()) +
                    " probabilities, expected " +
                    std::to_string(oracle.n_classes()));
  }
  Prediction p;
  try {
    p.output = MakeOutputTuple(probs);
  } catch (const Error& e) {
    throw Error(ErrorCode::kData, "oracle output: " + e.message());
  }
  p.prob_vector = std::move(probs);
  p.latency_us = latency_us;
  return p;
}

}  // namespace

std::vector<double> Softmax(std::span<const double> logits) {
  if (logits.empty()) throw Error(ErrorCode::kInput, "softmax of empty vector");
  for (double z : logits) {
    if (!std::isfinite(z)) throw Error(ErrorCode::kInput, "non-finite logit");
  }
  const double shift = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - shift);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

std::vector<std::vector<double>> OracleClient::ProbabilitiesBatch(
    std::span<const ImageTensor> images) {
  std::vector<std::vector<double>> out;
  out.reserve(images.size());
  for (const ImageTensor& image : images) out.push_back(Probabilities(image));
  return out;
}

Prediction Predict(OracleClient& oracle, const ImageTensor& image) {
  CheckShape(oracle, image);
  const auto start = std::chrono::steady_clock::now();
  std::vector<double> probs = oracle.Probabilities(image);
  const auto elapsed = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::steady_clock::now() - start);
  return ToPrediction(oracle, std::move(probs), elapsed.count());
}

std::vector<Prediction> PredictBatch(OracleClient& oracle,
                                     std::span<const ImageTensor> images) {
  if (images.empty()) return {};
  for (size_t i = 0; i < images.size(); ++i) {
    try {
      CheckShape(oracle, images[i]);
    } catch (const Error& e) {
      throw Error(e.code(), "batch index " + std::to_string(i) + ": " + e.message());
    }
  }
  const auto start = std::chrono::steady_clock::now();
  auto batch = oracle.ProbabilitiesBatch(images);
  const auto elapsed = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::steady_clock::now() - start);
  if (batch.size() != images.size()) {
    throw Error(ErrorCode::kData, "oracle batch returned " +
                                      std::to_string(batch.size()) +
                                      " results for " +
                                      std::to_string(images.size()) + " images");
  }
  std::vector<Prediction> out;
  out.reserve(batch.size());
  const int64_t per_item = elapsed.count() / static_cast<int64_t>(batch.size());
  for (size_t i = 0; i < batch.size(); ++i) {
    try {
      out.push_back(ToPrediction(oracle, std::move(batch[i]), per_item));
    } catch (const Error& e) {
      throw Error(e.code(), "batch index " + std::to_string(i) + ": " + e.message());
    }
  }
  return out;
}

}  // namespace codofuzz
