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

#ifndef CODOFUZZ_DATASET_H_
#define CODOFUZZ_DATASET_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "codofuzz/image.h"
#include "codofuzz/oracle.h"
#include "codofuzz/rng.h"
#include "codofuzz/seed_pool.h"
#include "codofuzz/transforms.h"
#include "json.hpp"

namespace codofuzz {

struct LabeledImage {
  ImageTensor image;
  int label = 0;
};

struct Dataset {
  ImageShape shape;
  int n_classes = 0;
  std::vector<LabeledImage> items;
};

// Gaussian clusters in the unit square, one per class, rendered as a single
// bright spot on a dark image. Item i is drawn from cluster i % n_classes.
struct BlobSpec {
  enum class LabelRule {
    kCluster,      // label = generating cluster
    kNearestMean,  // label = class whose mean is closest to the spot center
  };

  int n_classes = 3;
  ImageShape shape{16, 16, 1};
  // Cluster centers as (x, y) fractions of the image extent.
  std::vector<std::array<double, 2>> means;
  // Row-major 2x2 covariance per class, in the same units as means.
  std::vector<std::array<double, 4>> covariances;
  uint64_t seed = 0;
  int count = 0;
  double spot_sigma = 1.5;  // pixels
  Range intensity{0.6, 1.0};
  double pixel_noise = 0.0;
  LabelRule label_rule = LabelRule::kCluster;

  // Throws kConfig.
  void Validate() const;
};

void to_json(nlohmann::json& j, const BlobSpec& s);
void from_json(const nlohmann::json& j, BlobSpec& s);
BlobSpec LoadBlobSpec(const std::filesystem::path& path);

struct DatasetSource {
  enum class Kind { kIdxPair, kPngDirectory, kSyntheticBlobs };
  Kind kind = Kind::kPngDirectory;
  std::filesystem::path images;  // IDX images file or PNG directory root
  std::filesystem::path labels;  // IDX labels file
  BlobSpec blobs;
  // 0 means infer (max label + 1).
  int n_classes = 0;
};

// Parses a CLI descriptor:
//   idx:<images-file>,<labels-file> | blobs:<spec.json> | [png:]<directory>
DatasetSource ParseDatasetSource(std::string_view descriptor);

// Reads a dataset in a deterministic order with pixels normalized to
// [0, 1]. Malformed bytes raise kParse naming the byte offset;
// image/label count mismatches and out-of-range labels raise kData.
Dataset LoadDataset(const DatasetSource& source);

// IDX ubyte pair: images magic 0x00000803 (n, rows, cols), labels magic
// 0x00000801 (n), all big-endian.
Dataset LoadIdx(const std::filesystem::path& images,
                const std::filesystem::path& labels, int n_classes = 0);
// <dir>/labels.csv (UTF-8, LF, header "filename,label") naming files under
// <dir>/images/.
Dataset LoadPngDirectory(const std::filesystem::path& dir, int n_classes = 0);
Dataset GenerateBlobs(const BlobSpec& spec);

// Writes `dataset` as a PNG directory readable by LoadPngDirectory.
void SavePngDirectory(const std::filesystem::path& dir, const Dataset& dataset);

struct SeedSetResult {
  SeedPool pool;
  // Classes with fewer correct images than requested (all taken).
  std::vector<int> short_classes;
  // Classes without a single correctly classified image.
  std::vector<int> skipped_classes;
};

// Picks `per_class` correctly classified images per class uniformly at
// random. Seeds get ids 0.. in class-major order and carry their prediction.
// Throws kConfig if no class has a correct image, kData if a label is out of
// the oracle's range.
SeedSetResult BuildSeedSet(const Dataset& dataset, OracleClient& oracle,
                           int per_class, Rng& rng);

}  // namespace codofuzz

#endif  // CODOFUZZ_DATASET_H_
