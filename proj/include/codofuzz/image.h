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

#ifndef CODOFUZZ_IMAGE_H_
#define CODOFUZZ_IMAGE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace codofuzz {

struct ImageShape {
  int height = 0;
  int width = 0;
  int channels = 0;

  size_t size() const {
    return static_cast<size_t>(height) * static_cast<size_t>(width) *
           static_cast<size_t>(channels);
  }
  bool valid() const { return height > 0 && width > 0 && channels > 0; }
  std::string ToString() const;

  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

void to_json(nlohmann::json& j, const ImageShape& shape);
void from_json(const nlohmann::json& j, ImageShape& shape);

// Row-major, channel-interleaved image with 32-bit pixels in [0, 1].
class ImageTensor {
 public:
  ImageTensor() = default;
  // Zero-filled image. Throws kInput on a non-positive dimension.
  explicit ImageTensor(ImageShape shape);
  // Throws kInput if the pixel count disagrees with the shape or any pixel
  // falls outside [0, 1].
  ImageTensor(ImageShape shape, std::vector<float> pixels);

  const ImageShape& shape() const { return shape_; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }
  int channels() const { return shape_.channels; }
  size_t size() const { return pixels_.size(); }

  std::span<const float> pixels() const { return pixels_; }
  std::span<float> mutable_pixels() { return pixels_; }

  float at(int row, int col, int ch) const {
    return pixels_[Index(row, col, ch)];
  }
  float& at(int row, int col, int ch) { return pixels_[Index(row, col, ch)]; }

  size_t Index(int row, int col, int ch) const {
    return (static_cast<size_t>(row) * shape_.width + col) * shape_.channels +
           ch;
  }

  // Clamps every pixel into [0, 1] (NaN becomes 0).
  void Clamp();

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

 private:
  ImageShape shape_;
  std::vector<float> pixels_;
};

// Snaps every pixel to the nearest multiple of 1/255 after clamping. The
// result is a fixed point of the 8-bit PNG round trip, so an image that went
// through Quantize is stored, predicted on, and replayed bit-identically.
ImageTensor Quantize(ImageTensor image);

std::vector<uint8_t> ToBytes(const ImageTensor& image);
ImageTensor FromBytes(ImageShape shape, std::span<const uint8_t> bytes);

}  // namespace codofuzz

#endif  // CODOFUZZ_IMAGE_H_
