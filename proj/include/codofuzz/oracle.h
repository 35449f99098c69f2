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

#ifndef CODOFUZZ_ORACLE_H_
#define CODOFUZZ_ORACLE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "codofuzz/coverage.h"
#include "codofuzz/image.h"

namespace codofuzz {

// Numerically stable softmax (max-shifted). Throws kInput on NaN or
// infinite logits, or an empty vector.
std::vector<double> Softmax(std::span<const double> logits);

struct Prediction {
  std::vector<double> prob_vector;
  OutputTuple output;
  // Wall time of the oracle call. Diagnostic only; never serialized into
  // suite records so that suites stay byte-reproducible.
  int64_t latency_us = 0;
};

// A classifier seen strictly as a black box: image in, probability vector
// out. Nothing else about the model is observable through this interface.
class OracleClient {
 public:
  virtual ~OracleClient() = default;

  virtual int n_classes() const = 0;
  virtual ImageShape input_shape() const = 0;
  // Human-readable descriptor recorded in suite manifests.
  virtual std::string Describe() const = 0;
  // Whether concurrent Probabilities calls are unsafe. The engine
  // serializes calls to serial clients.
  virtual bool serial() const { return true; }

  virtual std::vector<double> Probabilities(const ImageTensor& image) = 0;
  // Default: one Probabilities call per image, in order.
  virtual std::vector<std::vector<double>> ProbabilitiesBatch(
      std::span<const ImageTensor> images);
};

// Queries the oracle and derives the output tuple on the engine side (tie
// break and validation are ours, not the peer's). Throws kInput on a shape
// mismatch and kData if the returned vector is not a valid simplex point of
// length n_classes().
Prediction Predict(OracleClient& oracle, const ImageTensor& image);

// Same results as Predict applied to each image in order. A failure is
// rethrown with the failing index prepended to the message.
std::vector<Prediction> PredictBatch(OracleClient& oracle,
                                     std::span<const ImageTensor> images);

}  // namespace codofuzz

#endif  // CODOFUZZ_ORACLE_H_
