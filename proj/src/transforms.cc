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

#include "codofuzz/transforms.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "codofuzz/error.h"

namespace codofuzz {
namespace {

constexpr double kRangeSlack = 1e-9;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

// Mirror index into [0, n) without repeating the edge sample.
int Reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

// Bilinear sample at fractional (x = column, y = row).
float Sample(const ImageTensor& img, double x, double y, int ch) {
  const double fx0 = std::floor(x);
  const double fy0 = std::floor(y);
  const double ax = x - fx0;
  const double ay = y - fy0;
  const int x0 = static_cast<int>(fx0);
  const int y0 = static_cast<int>(fy0);
  const int w = img.width();
  const int h = img.height();
  const int xa = Reflect(x0, w), xb = Reflect(x0 + 1, w);
  const int ya = Reflect(y0, h), yb = Reflect(y0 + 1, h);
  const double v = img.at(ya, xa, ch) * (1.0 - ax) * (1.0 - ay) +
                   img.at(ya, xb, ch) * ax * (1.0 - ay) +
                   img.at(yb, xa, ch) * (1.0 - ax) * ay +
                   img.at(yb, xb, ch) * ax * ay;
  return static_cast<float>(v);
}

// Fills every output pixel by sampling the input at map(col, row).
template <typename Map>
ImageTensor Warp(const ImageTensor& in, Map&& map) {
  ImageTensor out(in.shape());
  for (int r = 0; r < in.height(); ++r) {
    for (int c = 0; c < in.width(); ++c) {
      const auto [sx, sy] = map(static_cast<double>(c), static_cast<double>(r));
      for (int ch = 0; ch < in.channels(); ++ch) {
        out.at(r, c, ch) = Sample(in, sx, sy, ch);
      }
    }
  }
  out.Clamp();
  return out;
}

ImageTensor Crop(const ImageTensor& in, const CropParams& p) {
  const double sx = static_cast<double>(p.width) / in.width();
  const double sy = static_cast<double>(p.height) / in.height();
  return Warp(in, [&](double c, double r) {
    return std::pair{p.left + (c + 0.5) * sx - 0.5, p.top + (r + 0.5) * sy - 0.5};
  });
}

ImageTensor Rotate(const ImageTensor& in, const RotationParams& p) {
  const double theta = p.degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  const double cx = (in.width() - 1) / 2.0;
  const double cy = (in.height() - 1) / 2.0;
  // Inverse map of a counter-clockwise rotation in a y-down frame.
  return Warp(in, [&](double c, double r) {
    const double x = c - cx;
    const double y = r - cy;
    return std::pair{cs * x - sn * y + cx, sn * x + cs * y + cy};
  });
}

ImageTensor Perspective(const ImageTensor& in, const PerspectiveParams& p) {
  const double w = in.width() - 1;
  const double h = in.height() - 1;
  const std::array<std::pair<double, double>, 4> src = {
      std::pair{0.0, 0.0}, {w, 0.0}, {w, h}, {0.0, h}};
  // Homography taking output corners (displaced) to input corners.
  Eigen::Matrix<double, 8, 8> a;
  Eigen::Matrix<double, 8, 1> b;
  for (int i = 0; i < 4; ++i) {
    const double u = src[i].first + p.offsets[2 * i];
    const double v = src[i].second + p.offsets[2 * i + 1];
    const double x = src[i].first;
    const double y = src[i].second;
    a.row(2 * i) << u, v, 1, 0, 0, 0, -u * x, -v * x;
    a.row(2 * i + 1) << 0, 0, 0, u, v, 1, -u * y, -v * y;
    b(2 * i) = x;
    b(2 * i + 1) = y;
  }
  const Eigen::Matrix<double, 8, 1> m = a.fullPivLu().solve(b);
  return Warp(in, [&](double c, double r) {
    const double den = m(6) * c + m(7) * r + 1.0;
    return std::pair{(m(0) * c + m(1) * r + m(2)) / den,
                     (m(3) * c + m(4) * r + m(5)) / den};
  });
}

ImageTensor Flip(const ImageTensor& in) {
  ImageTensor out(in.shape());
  const int w = in.width();
  for (int r = 0; r < in.height(); ++r) {
    for (int c = 0; c < w; ++c) {
      for (int ch = 0; ch < in.channels(); ++ch) {
        out.at(r, c, ch) = in.at(r, w - 1 - c, ch);
      }
    }
  }
  return out;
}

ImageTensor AutoContrast(const ImageTensor& in) {
  ImageTensor out = in;
  const int channels = in.channels();
  for (int ch = 0; ch < channels; ++ch) {
    float lo = 1.0f, hi = 0.0f;
    for (size_t i = ch; i < in.size(); i += channels) {
      lo = std::min(lo, in.pixels()[i]);
      hi = std::max(hi, in.pixels()[i]);
    }
    if (hi <= lo) continue;
    const double scale = 1.0 / (static_cast<double>(hi) - lo);
    for (size_t i = ch; i < in.size(); i += channels) {
      out.mutable_pixels()[i] =
          static_cast<float>((in.pixels()[i] - static_cast<double>(lo)) * scale);
    }
  }
  out.Clamp();
  return out;
}

double MeanLuminance(const ImageTensor& img) {
  double sum = 0.0;
  const size_t pixels = static_cast<size_t>(img.height()) * img.width();
  if (img.channels() == 3) {
    for (size_t i = 0; i < pixels; ++i) {
      const float* px = img.pixels().data() + 3 * i;
      sum += 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
    }
    return sum / static_cast<double>(pixels);
  }
  for (float v : img.pixels()) sum += v;
  return sum / static_cast<double>(img.size());
}

ImageTensor ColorJitter(const ImageTensor& in, const ColorJitterParams& p) {
  ImageTensor out = in;
  for (float& v : out.mutable_pixels()) {
    v = static_cast<float>(std::clamp(v * p.brightness, 0.0, 1.0));
  }
  const double mean = MeanLuminance(out);
  for (float& v : out.mutable_pixels()) {
    v = static_cast<float>(p.contrast * v + (1.0 - p.contrast) * mean);
  }
  out.Clamp();
  return out;
}

ImageTensor Blur(const ImageTensor& in, const GaussianBlurParams& p) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * p.sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * i * i / (p.sigma * p.sigma));
    total += kernel[i + radius];
  }
  for (double& k : kernel) k /= total;

  const int h = in.height(), w = in.width(), channels = in.channels();
  std::vector<double> tmp(in.size());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (int ch = 0; ch < channels; ++ch) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          acc += kernel[i + radius] * in.at(r, Reflect(c + i, w), ch);
        }
        tmp[in.Index(r, c, ch)] = acc;
      }
    }
  }
  ImageTensor out(in.shape());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (int ch = 0; ch < channels; ++ch) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          acc += kernel[i + radius] * tmp[in.Index(Reflect(r + i, h), c, ch)];
        }
        out.at(r, c, ch) = static_cast<float>(acc);
      }
    }
  }
  out.Clamp();
  return out;
}

[[noreturn]] void OutOfRange(const std::string& what) {
  throw Error(ErrorCode::kConfig, "transform parameter out of range: " + what);
}

void CheckRange(const Range& r, const char* name) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo <= 0.0 ||
      r.lo > r.hi) {
    throw Error(ErrorCode::kConfig, std::string(name) + " range must satisfy 0 < lo <= hi");
  }
}

bool Within(double v, const Range& r) {
  return std::isfinite(v) && v >= r.lo - kRangeSlack && v <= r.hi + kRangeSlack;
}

}  // namespace

std::string_view TransformName(TransformKind kind) {
  switch (kind) {
    case TransformKind::kRandomCrop: return "random_crop";
    case TransformKind::kAutoContrast: return "auto_contrast";
    case TransformKind::kColorJitter: return "color_jitter";
    case TransformKind::kHorizontalFlip: return "horizontal_flip";
    case TransformKind::kRotation: return "rotation";
    case TransformKind::kGaussianBlur: return "gaussian_blur";
    case TransformKind::kRandomPerspective: return "random_perspective";
  }
  return "unknown";
}

std::optional<TransformKind> ParseTransformKind(std::string_view name) {
  for (TransformKind k : kAllTransformKinds) {
    if (TransformName(k) == name) return k;
  }
  return std::nullopt;
}

bool IsAffine(TransformKind kind) {
  return kind == TransformKind::kRandomCrop ||
         kind == TransformKind::kHorizontalFlip ||
         kind == TransformKind::kRotation ||
         kind == TransformKind::kRandomPerspective;
}

TransformKind KindOf(const Transform& t) {
  return std::visit(
      Overloaded{
          [](const CropParams&) { return TransformKind::kRandomCrop; },
          [](const AutoContrastParams&) { return TransformKind::kAutoContrast; },
          [](const ColorJitterParams&) { return TransformKind::kColorJitter; },
          [](const HorizontalFlipParams&) { return TransformKind::kHorizontalFlip; },
          [](const RotationParams&) { return TransformKind::kRotation; },
          [](const GaussianBlurParams&) { return TransformKind::kGaussianBlur; },
          [](const PerspectiveParams&) { return TransformKind::kRandomPerspective; },
      },
      t);
}

void to_json(nlohmann::json& j, const Transform& t) {
  j = nlohmann::json{{"kind", TransformName(KindOf(t))}};
  std::visit(Overloaded{
                 [&](const CropParams& p) {
                   j["top"] = p.top;
                   j["left"] = p.left;
                   j["height"] = p.height;
                   j["width"] = p.width;
                 },
                 [&](const ColorJitterParams& p) {
                   j["brightness"] = p.brightness;
                   j["contrast"] = p.contrast;
                 },
                 [&](const RotationParams& p) { j["degrees"] = p.degrees; },
                 [&](const GaussianBlurParams& p) { j["sigma"] = p.sigma; },
                 [&](const PerspectiveParams& p) { j["offsets"] = p.offsets; },
                 [](const auto&) {},
             },
             t);
}

void from_json(const nlohmann::json& j, Transform& t) {
  try {
    const std::string name = j.at("kind").get<std::string>();
    const auto kind = ParseTransformKind(name);
    if (!kind) throw Error(ErrorCode::kParse, "unknown transform " + name);
    switch (*kind) {
      case TransformKind::kRandomCrop:
        t = CropParams{j.at("top").get<int>(), j.at("left").get<int>(),
                       j.at("height").get<int>(), j.at("width").get<int>()};
        break;
      case TransformKind::kAutoContrast:
        t = AutoContrastParams{};
        break;
      case TransformKind::kColorJitter:
        t = ColorJitterParams{j.at("brightness").get<double>(),
                              j.at("contrast").get<double>()};
        break;
      case TransformKind::kHorizontalFlip:
        t = HorizontalFlipParams{};
        break;
      case TransformKind::kRotation:
        t = RotationParams{j.at("degrees").get<double>()};
        break;
      case TransformKind::kGaussianBlur:
        t = GaussianBlurParams{j.at("sigma").get<double>()};
        break;
      case TransformKind::kRandomPerspective:
        t = PerspectiveParams{j.at("offsets").get<std::array<double, 8>>()};
        break;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("transform: ") + e.what());
  }
}

void TransformRanges::Validate() const {
  if (!std::isfinite(rotation_max_degrees) || rotation_max_degrees < 0.0 ||
      rotation_max_degrees > 180.0) {
    throw Error(ErrorCode::kConfig, "rotation_max_degrees must be in [0,180]");
  }
  if (!(crop_min_area > 0.0 && crop_min_area <= 1.0)) {
    throw Error(ErrorCode::kConfig, "crop_min_area must be in (0,1]");
  }
  CheckRange(brightness, "brightness");
  CheckRange(contrast, "contrast");
  CheckRange(blur_sigma, "blur_sigma");
  if (!(perspective_scale >= 0.0 && perspective_scale < 1.0)) {
    throw Error(ErrorCode::kConfig, "perspective_scale must be in [0,1)");
  }
}

void to_json(nlohmann::json& j, const TransformRanges& r) {
  j = nlohmann::json{{"rotation_max_degrees", r.rotation_max_degrees},
                     {"crop_min_area", r.crop_min_area},
                     {"brightness", {r.brightness.lo, r.brightness.hi}},
                     {"contrast", {r.contrast.lo, r.contrast.hi}},
                     {"blur_sigma", {r.blur_sigma.lo, r.blur_sigma.hi}},
                     {"perspective_scale", r.perspective_scale}};
}

void from_json(const nlohmann::json& j, TransformRanges& r) {
  auto range = [&](const char* key, Range& out) {
    if (!j.contains(key)) return;
    const auto v = j.at(key).get<std::vector<double>>();
    if (v.size() != 2) throw Error(ErrorCode::kConfig, std::string(key) + " needs [lo, hi]");
    out = {v[0], v[1]};
  };
  r.rotation_max_degrees = j.value("rotation_max_degrees", r.rotation_max_degrees);
  r.crop_min_area = j.value("crop_min_area", r.crop_min_area);
  range("brightness", r.brightness);
  range("contrast", r.contrast);
  range("blur_sigma", r.blur_sigma);
  r.perspective_scale = j.value("perspective_scale", r.perspective_scale);
}

void CheckTransform(const Transform& t, const ImageShape& shape,
                    const TransformRanges& ranges) {
  std::visit(
      Overloaded{
          [&](const CropParams& p) {
            if (p.height < 1 || p.width < 1 || p.top < 0 || p.left < 0 ||
                p.top + p.height > shape.height ||
                p.left + p.width > shape.width) {
              OutOfRange("crop box outside the image");
            }
            // Each side is sqrt(area) of the original, rounded to a pixel.
            const double min_side = std::sqrt(ranges.crop_min_area);
            if (p.height < shape.height * min_side - 0.5 - kRangeSlack ||
                p.width < shape.width * min_side - 0.5 - kRangeSlack) {
              OutOfRange("crop box smaller than crop_min_area allows");
            }
          },
          [&](const ColorJitterParams& p) {
            if (!Within(p.brightness, ranges.brightness)) OutOfRange("brightness");
            if (!Within(p.contrast, ranges.contrast)) OutOfRange("contrast");
          },
          [&](const RotationParams& p) {
            if (!std::isfinite(p.degrees) ||
                std::abs(p.degrees) > ranges.rotation_max_degrees + kRangeSlack) {
              OutOfRange("rotation " + std::to_string(p.degrees) + " degrees");
            }
          },
          [&](const GaussianBlurParams& p) {
            if (!Within(p.sigma, ranges.blur_sigma)) OutOfRange("blur sigma");
          },
          [&](const PerspectiveParams& p) {
            const double max_dx = ranges.perspective_scale * shape.width / 2.0;
            const double max_dy = ranges.perspective_scale * shape.height / 2.0;
            for (int i = 0; i < 4; ++i) {
              const double dx = p.offsets[2 * i], dy = p.offsets[2 * i + 1];
              if (!std::isfinite(dx) || !std::isfinite(dy) ||
                  std::abs(dx) > max_dx + kRangeSlack ||
                  std::abs(dy) > max_dy + kRangeSlack) {
                OutOfRange("perspective corner offset");
              }
            }
          },
          [](const auto&) {},
      },
      t);
}

Transform SampleTransform(TransformKind kind, const ImageShape& shape,
                          const TransformRanges& ranges, Rng& rng) {
  switch (kind) {
    case TransformKind::kRandomCrop: {
      const double side = std::sqrt(rng.Uniform(ranges.crop_min_area, 1.0));
      const int h = std::clamp(static_cast<int>(std::lround(shape.height * side)),
                               1, shape.height);
      const int w = std::clamp(static_cast<int>(std::lround(shape.width * side)),
                               1, shape.width);
      const int top = static_cast<int>(rng.UniformIndex(shape.height - h + 1));
      const int left = static_cast<int>(rng.UniformIndex(shape.width - w + 1));
      return CropParams{top, left, h, w};
    }
    case TransformKind::kAutoContrast:
      return AutoContrastParams{};
    case TransformKind::kColorJitter: {
      const double b = rng.Uniform(ranges.brightness.lo, ranges.brightness.hi);
      const double c = rng.Uniform(ranges.contrast.lo, ranges.contrast.hi);
      return ColorJitterParams{b, c};
    }
    case TransformKind::kHorizontalFlip:
      return HorizontalFlipParams{};
    case TransformKind::kRotation:
      return RotationParams{rng.Uniform(-ranges.rotation_max_degrees,
                                        ranges.rotation_max_degrees)};
    case TransformKind::kGaussianBlur:
      return GaussianBlurParams{rng.Uniform(ranges.blur_sigma.lo, ranges.blur_sigma.hi)};
    case TransformKind::kRandomPerspective: {
      const double max_dx = ranges.perspective_scale * shape.width / 2.0;
      const double max_dy = ranges.perspective_scale * shape.height / 2.0;
      // Corners move inward: TL(+,+) TR(-,+) BR(-,-) BL(+,-).
      constexpr std::array<double, 8> kSign = {1, 1, -1, 1, -1, -1, 1, -1};
      PerspectiveParams p;
      for (int i = 0; i < 8; ++i) {
        const double limit = (i % 2 == 0) ? max_dx : max_dy;
        p.offsets[i] = kSign[i] * rng.Uniform(0.0, limit);
      }
      return p;
    }
  }
  throw Error(ErrorCode::kLogic, "unhandled transform kind");
}

ImageTensor ApplyTransform(const ImageTensor& image, const Transform& t,
                           const TransformRanges& ranges) {
  CheckTransform(t, image.shape(), ranges);
  return std::visit(
      Overloaded{
          [&](const CropParams& p) { return Crop(image, p); },
          [&](const AutoContrastParams&) { return AutoContrast(image); },
          [&](const ColorJitterParams& p) { return ColorJitter(image, p); },
          [&](const HorizontalFlipParams&) { return Flip(image); },
          [&](const RotationParams& p) { return Rotate(image, p); },
          [&](const GaussianBlurParams& p) { return Blur(image, p); },
          [&](const PerspectiveParams& p) { return Perspective(image, p); },
      },
      t);
}

}  // namespace codofuzz
