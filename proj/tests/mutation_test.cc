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

#include "codofuzz/mutation.h"

#include <algorithm>
#include <map>
#include <random>

#include "codofuzz/error.h"
#include "codofuzz/transforms.h"
#include "gtest/gtest.h"

namespace codofuzz {
namespace {

ImageTensor RandomImage(ImageShape shape, uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> u(0, 255);
  std::vector<float> px(shape.size());
  for (float& p : px) p = u(gen) / 255.0f;
  return ImageTensor(shape, std::move(px));
}

TransformRanges Wide() {
  TransformRanges r;
  r.rotation_max_degrees = 180.0;
  return r;
}

TEST(TransformTest, FlipIsAnInvolution) {
  const ImageTensor img = RandomImage({7, 6, 3}, 1);
  const ImageTensor once = ApplyTransform(img, HorizontalFlipParams{});
  EXPECT_NE(once, img);
  EXPECT_EQ(ApplyTransform(once, HorizontalFlipParams{}), img);
}

TEST(TransformTest, ZeroRotationIsIdentity) {
  const ImageTensor img = RandomImage({9, 11, 1}, 2);
  EXPECT_EQ(ApplyTransform(img, RotationParams{0.0}), img);
}

TEST(TransformTest, QuarterTurnIsCounterClockwise) {
  // One-hot at (row 0, col 0) of a 3x3 image. A 90 degree turn that is
  // counter-clockwise on screen carries the top-left corner to the
  // bottom-left corner: (0,0) -> (2,0).
  ImageTensor img(ImageShape{3, 3, 1});
  img.at(0, 0, 0) = 1.0f;
  const ImageTensor out = ApplyTransform(img, RotationParams{90.0}, Wide());
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      EXPECT_NEAR(out.at(r, c, 0), (r == 2 && c == 0) ? 1.0f : 0.0f, 1e-6)
          << r << "," << c;
    }
  }
  // And the top-right corner goes to the top-left.
  ImageTensor tr(ImageShape{3, 3, 1});
  tr.at(0, 2, 0) = 1.0f;
  EXPECT_NEAR(ApplyTransform(tr, RotationParams{90.0}, Wide()).at(0, 0, 0), 1.0f, 1e-6);
}

TEST(TransformTest, FullCropAndIdentityPerspectiveAreIdentity) {
  const ImageTensor img = RandomImage({8, 8, 3}, 3);
  EXPECT_EQ(ApplyTransform(img, CropParams{0, 0, 8, 8}), img);
  EXPECT_EQ(ApplyTransform(img, PerspectiveParams{}), Quantize(img));
  EXPECT_EQ(ApplyTransform(img, ColorJitterParams{1.0, 1.0}), img);
}

TEST(TransformTest, CropZoomsIntoTheBox) {
  // Left half black, right half white; dropping the leftmost column and
  // resizing back moves the edge left.
  ImageTensor img(ImageShape{10, 10, 1});
  for (int r = 0; r < 10; ++r) {
    for (int c = 5; c < 10; ++c) img.at(r, c, 0) = 1.0f;
  }
  const ImageTensor out = ApplyTransform(img, CropParams{0, 1, 9, 9});
  EXPECT_NEAR(out.at(5, 0, 0), 0.0f, 1e-6);
  EXPECT_NEAR(out.at(5, 9, 0), 1.0f, 1e-6);
  int white = 0;
  for (int c = 0; c < 10; ++c) white += out.at(5, c, 0) > 0.5f;
  EXPECT_GT(white, 5);
  EXPECT_LT(white, 8);
}

TEST(TransformTest, AutoContrastStretchesRange) {
  std::vector<float> px = {0.2f, 0.4f, 0.6f, 0.4f};
  const ImageTensor out =
      ApplyTransform(ImageTensor(ImageShape{2, 2, 1}, px), AutoContrastParams{});
  EXPECT_NEAR(out.pixels()[0], 0.0f, 1e-6);
  EXPECT_NEAR(out.pixels()[1], 0.5f, 1e-6);
  EXPECT_NEAR(out.pixels()[2], 1.0f, 1e-6);
  // Constant image is left alone.
  const ImageTensor flat(ImageShape{2, 2, 1}, {0.3f, 0.3f, 0.3f, 0.3f});
  EXPECT_EQ(ApplyTransform(flat, AutoContrastParams{}), flat);
}

TEST(TransformTest, BlurPreservesConstantImage) {
  const ImageTensor flat(ImageShape{5, 5, 1}, std::vector<float>(25, 0.5f));
  const ImageTensor out = ApplyTransform(flat, GaussianBlurParams{1.0});
  for (float v : out.pixels()) EXPECT_NEAR(v, 0.5f, 1e-6);
}

TEST(TransformTest, RejectsOutOfRangeParameters) {
  const ImageTensor img = RandomImage({8, 8, 1}, 4);
  auto expect_config = [&](const Transform& t) {
    try {
      ApplyTransform(img, t);
      FAIL() << TransformName(KindOf(t));
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kConfig);
    }
  };
  expect_config(RotationParams{30.0});
  expect_config(GaussianBlurParams{5.0});
  expect_config(ColorJitterParams{2.0, 1.0});
  expect_config(CropParams{0, 0, 3, 3});
  expect_config(CropParams{2, 2, 8, 8});
  PerspectiveParams p;
  p.offsets[0] = 5.0;
  expect_config(p);
}

TEST(TransformTest, AllKindsPreserveShapeAndRange) {
  const TransformRanges ranges;
  Rng rng(5);
  for (ImageShape shape : {ImageShape{16, 16, 1}, ImageShape{5, 9, 3},
                           ImageShape{1, 1, 1}, ImageShape{2, 3, 1}}) {
    const ImageTensor img = RandomImage(shape, 6);
    for (TransformKind kind : kAllTransformKinds) {
      for (int i = 0; i < 20; ++i) {
        const Transform t = SampleTransform(kind, shape, ranges, rng);
        EXPECT_EQ(KindOf(t), kind);
        const ImageTensor out = ApplyTransform(img, t, ranges);
        ASSERT_EQ(out.shape(), shape);
        for (float v : out.pixels()) ASSERT_TRUE(v >= 0.0f && v <= 1.0f);
      }
    }
  }
}

TEST(TransformTest, JsonRoundTrip) {
  Rng rng(8);
  for (TransformKind kind : kAllTransformKinds) {
    const Transform t = SampleTransform(kind, {12, 12, 1}, {}, rng);
    const auto back = nlohmann::json::parse(nlohmann::json(t).dump()).get<Transform>();
    EXPECT_EQ(nlohmann::json(back), nlohmann::json(t));
    EXPECT_EQ(KindOf(back), kind);
  }
  EXPECT_THROW(nlohmann::json({{"kind", "swirl"}}).get<Transform>(), Error);
}

TEST(TransformRangesTest, Validation) {
  TransformRanges r;
  EXPECT_NO_THROW(r.Validate());
  r.crop_min_area = 0.0;
  EXPECT_THROW(r.Validate(), Error);
  r = {};
  r.brightness = {1.3, 1.2};
  EXPECT_THROW(r.Validate(), Error);
  r = {};
  r.perspective_scale = 1.5;
  EXPECT_THROW(r.Validate(), Error);
}

TEST(AffineTest, Classification) {
  EXPECT_TRUE(IsAffine(TransformKind::kRandomCrop));
  EXPECT_TRUE(IsAffine(TransformKind::kHorizontalFlip));
  EXPECT_TRUE(IsAffine(TransformKind::kRotation));
  EXPECT_TRUE(IsAffine(TransformKind::kRandomPerspective));
  EXPECT_FALSE(IsAffine(TransformKind::kAutoContrast));
  EXPECT_FALSE(IsAffine(TransformKind::kColorJitter));
  EXPECT_FALSE(IsAffine(TransformKind::kGaussianBlur));
}

TEST(ValidityTest, IdenticalImagesAreValid) {
  for (uint64_t s = 0; s < 20; ++s) {
    const ImageTensor img = RandomImage({6, 6, 3}, s);
    EXPECT_TRUE(IsValid(img, img, 0.2, 0.5));
    EXPECT_TRUE(IsValid(img, img, 1e-6, 1e-6));
  }
}

TEST(ValidityTest, SingleLargeChangeIsWithinL0Budget) {
  ImageTensor ref(ImageShape{28, 28, 1});
  ImageTensor cand = ref;
  cand.at(3, 4, 0) = 0.9f;  // L0 = 1 <= 0.2 * 784
  EXPECT_TRUE(IsValid(ref, cand, 0.2, 0.5));
}

TEST(ValidityTest, GlobalLargeShiftViolatesBothBounds) {
  ImageTensor ref(ImageShape{28, 28, 1});
  ImageTensor cand(ref.shape(), std::vector<float>(784, 0.6f));
  // L0 = 784 > 156.8 and Linf = 0.6 > 0.5.
  EXPECT_FALSE(IsValid(ref, cand, 0.2, 0.5));
  // A global shift within beta passes on L-infinity alone.
  ImageTensor small(ref.shape(), std::vector<float>(784, 0.4f));
  EXPECT_TRUE(IsValid(ref, small, 0.2, 0.5));
}

TEST(ValidityTest, L0BoundaryIsInclusive) {
  ImageTensor ref(ImageShape{10, 10, 1});
  ImageTensor cand = ref;
  for (int i = 0; i < 20; ++i) cand.mutable_pixels()[i] = 1.0f;
  EXPECT_TRUE(IsValid(ref, cand, 0.2, 0.5));  // 20 <= 20
  cand.mutable_pixels()[20] = 1.0f;
  EXPECT_FALSE(IsValid(ref, cand, 0.2, 0.5));
}

TEST(ValidityTest, Errors) {
  const ImageTensor a(ImageShape{2, 2, 1});
  const ImageTensor b(ImageShape{2, 2, 3});
  try {
    IsValid(a, b, 0.2, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInput);
  }
  EXPECT_THROW(IsValid(a, a, 0.0, 0.5), Error);
  EXPECT_THROW(IsValid(a, a, 0.2, 1.5), Error);
}

TEST(MutateTest, AffineUsedExcludesAffineKinds) {
  const ImageTensor img = RandomImage({12, 12, 1}, 9);
  LineageState lineage = RootLineage(img);
  lineage.affine_used = true;
  MutationOptions options;
  Rng rng(10);
  std::map<TransformKind, int> seen;
  for (int i = 0; i < 1000; ++i) {
    const Mutant m = Mutate(img, 0, lineage, options, rng);
    ASSERT_FALSE(m.record.is_affine);
    ++seen[m.record.kind()];
  }
  EXPECT_EQ(seen.size(), 3u);
}

TEST(MutateTest, HflipExcludedWhenDisallowed) {
  const ImageTensor img = RandomImage({12, 12, 1}, 9);
  MutationOptions options;
  options.allow_hflip = false;
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    ASSERT_NE(Mutate(img, 0, RootLineage(img), options, rng).record.kind(),
              TransformKind::kHorizontalFlip);
  }
  EXPECT_EQ(AdmissibleKinds(RootLineage(img), false).size(), 6u);
  EXPECT_EQ(AdmissibleKinds(RootLineage(img), true).size(), 7u);
}

TEST(MutateTest, DeterministicForFixedSeed) {
  const ImageTensor img = RandomImage({10, 10, 3}, 12);
  MutationOptions options;
  for (uint64_t seed : {1, 2, 3, 4, 5}) {
    Rng a(seed), b(seed);
    const Mutant x = Mutate(img, 7, RootLineage(img), options, a);
    const Mutant y = Mutate(img, 7, RootLineage(img), options, b);
    EXPECT_EQ(x.candidate, y.candidate);
    EXPECT_EQ(nlohmann::json(x.record), nlohmann::json(y.record));
    EXPECT_EQ(x.record.parent_id, 7);
    EXPECT_GT(x.record.rng_draws, 0u);
    for (float v : x.candidate.pixels()) EXPECT_TRUE(v >= 0.0f && v <= 1.0f);
    EXPECT_EQ(Quantize(x.candidate), x.candidate);
  }
}

TEST(MutateTest, OneAffineRuleAndReplayAlongRandomLineages) {
  const ImageTensor root = RandomImage({12, 12, 1}, 13);
  MutationOptions options;
  Rng rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    ImageTensor image = root;
    LineageState lineage = RootLineage(root);
    std::vector<MutationRecord> records;
    int affine = 0;
    for (int depth = 0; depth < 8; ++depth) {
      Mutant m = Mutate(image, depth, lineage, options, rng);
      affine += m.record.is_affine;
      ASSERT_LE(affine, 1);
      lineage = Advance(lineage, m.record, m.candidate);
      records.push_back(m.record);
      image = m.candidate;
    }
    const ReplayResult replay = Replay(root, records, options.ranges);
    ASSERT_EQ(replay.image, image);
    ASSERT_EQ(replay.lineage.reference, lineage.reference);
    ASSERT_EQ(replay.lineage.affine_used, lineage.affine_used);
    ASSERT_EQ(replay.lineage.depth, 8);
  }
}

TEST(LineageTest, AffineResetsReference) {
  const ImageTensor root = RandomImage({6, 6, 1}, 15);
  const ImageTensor flipped = ApplyTransform(root, HorizontalFlipParams{});
  LineageState s = RootLineage(root);
  MutationRecord affine{HorizontalFlipParams{}, true, 0, 0};
  s = Advance(s, affine, flipped);
  EXPECT_TRUE(s.affine_used);
  EXPECT_EQ(s.reference, flipped);
  MutationRecord pixel{GaussianBlurParams{1.0}, false, 1, 1};
  const LineageState t = Advance(s, pixel, root);
  EXPECT_EQ(t.reference, flipped);
  EXPECT_THROW(Advance(t, affine, root), Error);

  std::vector<MutationRecord> two = {affine, affine};
  EXPECT_THROW(Replay(root, two, {}), Error);
}

}  // namespace
}  // namespace codofuzz
