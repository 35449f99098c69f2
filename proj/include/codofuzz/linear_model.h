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

#ifndef CODOFUZZ_LINEAR_MODEL_H_
#define CODOFUZZ_LINEAR_MODEL_H_

#include <filesystem>
#include <string>
#include <vector>

#include "codofuzz/oracle.h"
#include "json.hpp"

namespace codofuzz {

// Built-in reference classifier: probs = softmax(W x + b) with x the
// flattened image. Deterministic and safe for concurrent reads.
//
// File format (JSON):
//   {"n_classes": N, "input_shape": [H,W,C],
//    "weights": [N*D row-major], "bias": [N]}
class LinearSoftmaxModel : public OracleClient {
 public:
  // Throws kConfig if the dimensions are inconsistent or any parameter is
  // not finite.
  LinearSoftmaxModel(int n_classes, ImageShape input_shape,
                     std::vector<double> weights, std::vector<double> bias);

  static LinearSoftmaxModel FromJson(const nlohmann::json& j);
  static LinearSoftmaxModel Load(const std::filesystem::path& path);
  nlohmann::json ToJson() const;
  void Save(const std::filesystem::path& path) const;

  int n_classes() const override { return n_classes_; }
  ImageShape input_shape() const override { return input_shape_; }
  std::string Describe() const override;
  bool serial() const override { return false; }

  std::vector<double> Logits(const ImageTensor& image) const;
  std::vector<double> Probabilities(const ImageTensor& image) override;

  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& bias() const { return bias_; }

  // Set by Load; reported by Describe.
  void set_source(std::string source) { source_ = std::move(source); }

 private:
  int n_classes_;
  ImageShape input_shape_;
  std::vector<double> weights_;
  std::vector<double> bias_;
  std::string source_ = "inline";
};

}  // namespace codofuzz

#endif  // CODOFUZZ_LINEAR_MODEL_H_
