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

#include "codofuzz/linear_model.h"

#include <cmath>
#include <fstream>

#include "codofuzz/error.h"

namespace codofuzz {

LinearSoftmaxModel::LinearSoftmaxModel(int n_classes, ImageShape input_shape,
                                       std::vector<double> weights,
                                       std::vector<double> bias)
    : n_classes_(n_classes),
      input_shape_(input_shape),
      weights_(std::move(weights)),
      bias_(std::move(bias)) {
  if (n_classes_ < 2) throw Error(ErrorCode::kConfig, "model needs >= 2 classes");
  if (!input_shape_.valid()) {
    throw Error(ErrorCode::kConfig,
                "invalid model input shape " + input_shape_.ToString());
  }
  const size_t d = input_shape_.size();
  if (weights_.size() != d * n_classes_) {
    throw Error(ErrorCode::kConfig,
                "weights length " + std::to_string(weights_.size()) +
                    " != n_classes * H*W*C = " +
                    std::to_string(d * n_classes_));
  }
  if (bias_.size() != static_cast<size_t>(n_classes_)) {
    throw Error(ErrorCode::kConfig, "bias length must equal n_classes");
  }
  for (double w : weights_) {
    if (!std::isfinite(w)) throw Error(ErrorCode::kConfig, "non-finite weight");
  }
  for (double b : bias_) {
    if (!std::isfinite(b)) throw Error(ErrorCode::kConfig, "non-finite bias");
  }
}

LinearSoftmaxModel LinearSoftmaxModel::FromJson(const nlohmann::json& j) {
  try {
    return LinearSoftmaxModel(j.at("n_classes").get<int>(),
                              j.at("input_shape").get<ImageShape>(),
                              j.at("weights").get<std::vector<double>>(),
                              j.at("bias").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("model file: ") + e.what());
  }
}

LinearSoftmaxModel LinearSoftmaxModel::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open model " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig,
                "model " + path.string() + " is not valid JSON: " + e.what());
  }
  LinearSoftmaxModel model = FromJson(j);
  model.set_source(path.string());
  return model;
}

nlohmann::json LinearSoftmaxModel::ToJson() const {
  return {{"n_classes", n_classes_},
          {"input_shape", input_shape_},
          {"weights", weights_},
          {"bias", bias_}};
}

void LinearSoftmaxModel::Save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write model " + path.string());
  out << ToJson().dump() << '\n';
}

std::string LinearSoftmaxModel::Describe() const {
  return "builtin:" + source_;
}

std::vector<double> LinearSoftmaxModel::Logits(const ImageTensor& image) const {
  if (image.shape() != input_shape_) {
    throw Error(ErrorCode::kInput, "image shape " + image.shape().ToString() +
                                       " does not match model input " +
                                       input_shape_.ToString());
  }
  const auto x = image.pixels();
  const size_t d = x.size();
  std::vector<double> logits(bias_);
  for (int c = 0; c < n_classes_; ++c) {
    const double* row = weights_.data() + static_cast<size_t>(c) * d;
    double acc = 0.0;
    for (size_t i = 0; i < d; ++i) acc += row[i] * static_cast<double>(x[i]);
    logits[c] += acc;
  }
  return logits;
}

std::vector<double> LinearSoftmaxModel::Probabilities(const ImageTensor& image) {
  return Softmax(Logits(image));
}

}  // namespace codofuzz
