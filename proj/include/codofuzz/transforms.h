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

#ifndef CODOFUZZ_TRANSFORMS_H_
#define CODOFUZZ_TRANSFORMS_H_

#include <array>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "codofuzz/image.h"
#include "codofuzz/rng.h"
#include "json.hpp"

namespace codofuzz {

enum class TransformKind {
  kRandomCrop,
  kAutoContrast,
  kColorJitter,
  kHorizontalFlip,
  kRotation,
  kGaussianBlur,
  kRandomPerspective,
};

inline constexpr std::array<TransformKind, 7> kAllTransformKinds = {
    TransformKind::kRandomCrop,     TransformKind::kAutoContrast,
    TransformKind::kColorJitter,    TransformKind::kHorizontalFlip,
    TransformKind::kRotation,       TransformKind::kGaussianBlur,
    TransformKind::kRandomPerspective,
};

std::string_view TransformName(TransformKind kind);
std::optional<TransformKind> ParseTransformKind(std::string_view name);
// Crop, flip, rotation and perspective move pixels; the rest only change
// their values.
bool IsAffine(TransformKind kind);

// Crop box in pixels; the crop is resized back to the full image.
struct CropParams {
  int top = 0;
  int left = 0;
  int height = 0;
  int width = 0;
};
struct AutoContrastParams {};
struct ColorJitterParams {
  double brightness = 1.0;
  double contrast = 1.0;
};
struct HorizontalFlipParams {};
// Counter-clockwise as displayed (row 0 at the top), about the image center.
struct RotationParams {
  double degrees = 0.0;
};
struct GaussianBlurParams {
  double sigma = 1.0;
};
// Displacement (dx, dy) in pixels of the output corners top-left, top-right,
// bottom-right, bottom-left; the input corners map onto the displaced ones.
struct PerspectiveParams {
  std::array<double, 8> offsets{};
};

using Transform =
    std::variant<CropParams, AutoContrastParams, ColorJitterParams,
                 HorizontalFlipParams, RotationParams, GaussianBlurParams,
                 PerspectiveParams>;

TransformKind KindOf(const Transform& t);

void to_json(nlohmann::json& j, const Transform& t);
void from_json(const nlohmann::json& j, Transform& t);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool Contains(double v) const { return v >= lo && v <= hi; }
};

// Admissible parameter ranges. Defaults keep perturbations small enough to
// be label preserving.
struct TransformRanges {
  double rotation_max_degrees = 15.0;
  double crop_min_area = 0.8;
  Range brightness{0.8, 1.25};
  Range contrast{0.8, 1.25};
  Range blur_sigma{0.5, 1.5};
  double perspective_scale = 0.2;

  // Throws kConfig on an empty or nonsensical range.
  void Validate() const;
};

void to_json(nlohmann::json& j, const TransformRanges& r);
void from_json(const nlohmann::json& j, TransformRanges& r);

// Throws kConfig if `t` lies outside `ranges` or does not fit `shape`.
void CheckTransform(const Transform& t, const ImageShape& shape,
                    const TransformRanges& ranges);

// Draws parameters for `kind` from `ranges`.
Transform SampleTransform(TransformKind kind, const ImageShape& shape,
                          const TransformRanges& ranges, Rng& rng);

// Applies `t` and returns an image of the same shape with pixels clamped to
// [0, 1]. Geometric transforms sample bilinearly with reflect padding.
// Throws kConfig on out-of-range parameters.
ImageTensor ApplyTransform(const ImageTensor& image, const Transform& t,
                           const TransformRanges& ranges = {});

}  // namespace codofuzz

#endif  // CODOFUZZ_TRANSFORMS_H_
