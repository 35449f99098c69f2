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

#include "codofuzz/image.h"

#include <algorithm>
#include <cmath>

#include "codofuzz/error.h"
#include "json.hpp"

namespace codofuzz {

std::string ImageShape::ToString() const {
  return "[" + std::to_string(height) + "," + std::to_string(width) + "," +
         std::to_string(channels) + "]";
}

void to_json(nlohmann::json& j, const ImageShape& shape) {
  j = nlohmann::json::array({shape.height, shape.width, shape.channels});
}

void from_json(const nlohmann::json& j, ImageShape& shape) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::kParse, "shape must be [H,W,C]");
  }
  shape = {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

ImageTensor::ImageTensor(ImageShape shape) : shape_(shape) {
  if (!shape.valid()) {
    throw Error(ErrorCode::kInput, "invalid image shape " + shape.ToString());
  }
  pixels_.assign(shape.size(), 0.0f);
}

ImageTensor::ImageTensor(ImageShape shape, std::vector<float> pixels)
    : shape_(shape), pixels_(std::move(pixels)) {
  if (!shape.valid()) {
    throw Error(ErrorCode::kInput, "invalid image shape " + shape.ToString());
  }
  if (pixels_.size() != shape.size()) {
    throw Error(ErrorCode::kInput,
                "pixel count " + std::to_string(pixels_.size()) +
                    " does not match shape " + shape.ToString());
  }
  for (size_t i = 0; i < pixels_.size(); ++i) {
    if (!(pixels_[i] >= 0.0f && pixels_[i] <= 1.0f)) {
      throw Error(ErrorCode::kInput,
                  "pixel " + std::to_string(i) + " outside [0,1]");
    }
  }
}

void ImageTensor::Clamp() {
  for (float& p : pixels_) {
    p = std::isnan(p) ? 0.0f : std::clamp(p, 0.0f, 1.0f);
  }
}

ImageTensor Quantize(ImageTensor image) {
  image.Clamp();
  for (float& p : image.mutable_pixels()) {
    p = static_cast<float>(std::lround(p * 255.0f)) / 255.0f;
  }
  return image;
}

std::vector<uint8_t> ToBytes(const ImageTensor& image) {
  std::vector<uint8_t> out(image.size());
  auto px = image.pixels();
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<uint8_t>(
        std::lround(std::clamp(px[i], 0.0f, 1.0f) * 255.0f));
  }
  return out;
}

ImageTensor FromBytes(ImageShape shape, std::span<const uint8_t> bytes) {
  std::vector<float> px(bytes.size());
  for (size_t i = 0; i < bytes.size(); ++i) px[i] = bytes[i] / 255.0f;
  return ImageTensor(shape, std::move(px));
}

}  // namespace codofuzz
