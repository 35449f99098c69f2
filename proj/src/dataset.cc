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

#include "codofuzz/dataset.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "codofuzz/error.h"
#include "codofuzz/image_io.h"

namespace codofuzz {
namespace {

std::string Hex32(uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "0x%08X", v);
  return buf;
}

uint32_t ReadBigEndian32(const std::vector<uint8_t>& bytes, size_t offset,
                         const std::filesystem::path& path) {
  if (offset + 4 > bytes.size()) {
    throw Error(ErrorCode::kParse, path.string() + ": truncated at offset " +
                                       std::to_string(bytes.size()) +
                                       " (header field at offset " +
                                       std::to_string(offset) + ")");
  }
  return (uint32_t{bytes[offset]} << 24) | (uint32_t{bytes[offset + 1]} << 16) |
         (uint32_t{bytes[offset + 2]} << 8) | uint32_t{bytes[offset + 3]};
}

void CheckMagic(const std::vector<uint8_t>& bytes, uint32_t expected,
                const std::filesystem::path& path) {
  const uint32_t magic = ReadBigEndian32(bytes, 0, path);
  if (magic != expected) {
    throw Error(ErrorCode::kParse, path.string() + ": bad magic " + Hex32(magic) +
                                       " at offset 0, expected " + Hex32(expected));
  }
}

int InferClasses(const std::vector<LabeledImage>& items, int declared) {
  int max_label = -1;
  for (const auto& item : items) max_label = std::max(max_label, item.label);
  const int n = declared > 0 ? declared : max_label + 1;
  if (max_label >= n) {
    throw Error(ErrorCode::kData, "label " + std::to_string(max_label) +
                                      " >= n_classes " + std::to_string(n));
  }
  return n;
}

void CheckRangeSpec(const Range& r, const char* name) {
  if (!(r.lo >= 0.0 && r.lo <= r.hi && r.hi <= 1.0)) {
    throw Error(ErrorCode::kConfig, std::string(name) + " must be within [0,1], lo <= hi");
  }
}

}  // namespace

void BlobSpec::Validate() const {
  if (n_classes < 2) throw Error(ErrorCode::kConfig, "blobs need >= 2 classes");
  if (!shape.valid()) throw Error(ErrorCode::kConfig, "invalid blob image shape");
  if (means.size() != static_cast<size_t>(n_classes) ||
      covariances.size() != static_cast<size_t>(n_classes)) {
    throw Error(ErrorCode::kConfig, "blobs need one mean and covariance per class");
  }
  for (const auto& cov : covariances) {
    // Positive definite and symmetric.
    if (!(cov[0] > 0.0 && cov[0] * cov[3] - cov[1] * cov[2] > 0.0) ||
        std::abs(cov[1] - cov[2]) > 1e-12) {
      throw Error(ErrorCode::kConfig, "blob covariance must be symmetric positive definite");
    }
  }
  if (count < 0) throw Error(ErrorCode::kConfig, "blob count must be >= 0");
  if (!(spot_sigma > 0.0)) throw Error(ErrorCode::kConfig, "spot_sigma must be > 0");
  CheckRangeSpec(intensity, "intensity");
  if (!(pixel_noise >= 0.0)) throw Error(ErrorCode::kConfig, "pixel_noise must be >= 0");
}

void to_json(nlohmann::json& j, const BlobSpec& s) {
  j = nlohmann::json{{"n_classes", s.n_classes},
                     {"shape", s.shape},
                     {"means", s.means},
                     {"covariances", s.covariances},
                     {"seed", s.seed},
                     {"count", s.count},
                     {"spot_sigma", s.spot_sigma},
                     {"intensity", {s.intensity.lo, s.intensity.hi}},
                     {"pixel_noise", s.pixel_noise},
                     {"label_rule", s.label_rule == BlobSpec::LabelRule::kCluster
                                        ? "cluster"
                                        : "nearest_mean"}};
}

void from_json(const nlohmann::json& j, BlobSpec& s) {
  try {
    s.n_classes = j.at("n_classes").get<int>();
    s.shape = j.at("shape").get<ImageShape>();
    s.means = j.at("means").get<std::vector<std::array<double, 2>>>();
    s.covariances = j.at("covariances").get<std::vector<std::array<double, 4>>>();
    s.seed = j.at("seed").get<uint64_t>();
    s.count = j.at("count").get<int>();
    s.spot_sigma = j.value("spot_sigma", s.spot_sigma);
    if (j.contains("intensity")) {
      const auto v = j.at("intensity").get<std::array<double, 2>>();
      s.intensity = {v[0], v[1]};
    }
    s.pixel_noise = j.value("pixel_noise", s.pixel_noise);
    const std::string rule = j.value("label_rule", std::string("cluster"));
    if (rule == "cluster") {
      s.label_rule = BlobSpec::LabelRule::kCluster;
    } else if (rule == "nearest_mean") {
      s.label_rule = BlobSpec::LabelRule::kNearestMean;
    } else {
      throw Error(ErrorCode::kConfig, "blob spec: label_rule must be cluster or nearest_mean");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("blob spec: ") + e.what());
  }
}

BlobSpec LoadBlobSpec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open blob spec " + path.string());
  try {
    return nlohmann::json::parse(in).get<BlobSpec>();
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kConfig, path.string() + ": " + e.what());
  }
}

DatasetSource ParseDatasetSource(std::string_view descriptor) {
  DatasetSource source;
  auto starts = [&](std::string_view prefix) {
    return descriptor.substr(0, prefix.size()) == prefix;
  };
  if (starts("idx:")) {
    const std::string rest(descriptor.substr(4));
    const size_t comma = rest.find(',');
    if (comma == std::string::npos) {
      throw Error(ErrorCode::kConfig, "idx source needs <images>,<labels>");
    }
    source.kind = DatasetSource::Kind::kIdxPair;
    source.images = rest.substr(0, comma);
    source.labels = rest.substr(comma + 1);
  } else if (starts("blobs:")) {
    source.kind = DatasetSource::Kind::kSyntheticBlobs;
    source.blobs = LoadBlobSpec(std::string(descriptor.substr(6)));
  } else {
    source.kind = DatasetSource::Kind::kPngDirectory;
    source.images = std::string(starts("png:") ? descriptor.substr(4) : descriptor);
  }
  return source;
}

Dataset LoadDataset(const DatasetSource& source) {
  switch (source.kind) {
    case DatasetSource::Kind::kIdxPair:
      return LoadIdx(source.images, source.labels, source.n_classes);
    case DatasetSource::Kind::kPngDirectory:
      return LoadPngDirectory(source.images, source.n_classes);
    case DatasetSource::Kind::kSyntheticBlobs:
      return GenerateBlobs(source.blobs);
  }
  throw Error(ErrorCode::kLogic, "unknown dataset kind");
}

Dataset LoadIdx(const std::filesystem::path& images_path,
                const std::filesystem::path& labels_path, int n_classes) {
  const auto images = ReadFileBytes(images_path);
  const auto labels = ReadFileBytes(labels_path);
  CheckMagic(images, 0x00000803, images_path);
  CheckMagic(labels, 0x00000801, labels_path);

  const uint32_t n_images = ReadBigEndian32(images, 4, images_path);
  const uint32_t rows = ReadBigEndian32(images, 8, images_path);
  const uint32_t cols = ReadBigEndian32(images, 12, images_path);
  const uint32_t n_labels = ReadBigEndian32(labels, 4, labels_path);
  if (rows == 0 || cols == 0) {
    throw Error(ErrorCode::kParse, images_path.string() + ": zero image dimension at offset 8");
  }
  const size_t image_bytes = static_cast<size_t>(rows) * cols;
  const size_t need_images = 16 + static_cast<size_t>(n_images) * image_bytes;
  if (images.size() < need_images) {
    throw Error(ErrorCode::kParse,
                images_path.string() + ": truncated at offset " +
                    std::to_string(images.size()) + ", header promises " +
                    std::to_string(need_images) + " bytes");
  }
  if (labels.size() < 8 + static_cast<size_t>(n_labels)) {
    throw Error(ErrorCode::kParse,
                labels_path.string() + ": truncated at offset " +
                    std::to_string(labels.size()) + ", header promises " +
                    std::to_string(8 + static_cast<size_t>(n_labels)) + " bytes");
  }
  if (n_images != n_labels) {
    throw Error(ErrorCode::kData, "IDX image count " + std::to_string(n_images) +
                                      " != label count " + std::to_string(n_labels));
  }

  Dataset ds;
  ds.shape = ImageShape{static_cast<int>(rows), static_cast<int>(cols), 1};
  ds.items.reserve(n_images);
  for (size_t i = 0; i < n_images; ++i) {
    std::span<const uint8_t> px(images.data() + 16 + i * image_bytes, image_bytes);
    ds.items.push_back({FromBytes(ds.shape, px), labels[8 + i]});
  }
  ds.n_classes = InferClasses(ds.items, n_classes);
  return ds;
}

Dataset LoadPngDirectory(const std::filesystem::path& dir, int n_classes) {
  const auto csv_path = dir / "labels.csv";
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + csv_path.string());
  std::string line;
  if (!std::getline(in, line) || line != "filename,label") {
    throw Error(ErrorCode::kParse,
                csv_path.string() + ": header must be exactly 'filename,label'");
  }
  Dataset ds;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const size_t comma = line.rfind(',');
    if (comma == std::string::npos || comma == 0) {
      throw Error(ErrorCode::kParse,
                  csv_path.string() + ":" + std::to_string(line_no) + ": expected filename,label");
    }
    int label = 0;
    try {
      size_t used = 0;
      label = std::stoi(line.substr(comma + 1), &used);
      if (used != line.size() - comma - 1 || label < 0) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParse,
                  csv_path.string() + ":" + std::to_string(line_no) + ": bad label");
    }
    ImageTensor image = ReadPng(dir / "images" / line.substr(0, comma));
    if (ds.items.empty()) {
      ds.shape = image.shape();
    } else if (image.shape() != ds.shape) {
      throw Error(ErrorCode::kData, line.substr(0, comma) + " has shape " +
                                        image.shape().ToString() + ", expected " +
                                        ds.shape.ToString());
    }
    ds.items.push_back({std::move(image), label});
  }
  ds.n_classes = InferClasses(ds.items, n_classes);
  return ds;
}

void SavePngDirectory(const std::filesystem::path& dir, const Dataset& dataset) {
  std::filesystem::create_directories(dir / "images");
  std::ofstream csv(dir / "labels.csv", std::ios::binary | std::ios::trunc);
  if (!csv) throw Error(ErrorCode::kIo, "cannot write " + (dir / "labels.csv").string());
  csv << "filename,label\n";
  for (size_t i = 0; i < dataset.items.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "%06zu.png", i);
    WritePng(dir / "images" / name, dataset.items[i].image);
    csv << name << ',' << dataset.items[i].label << '\n';
  }
}

Dataset GenerateBlobs(const BlobSpec& spec) {
  spec.Validate();
  Rng rng(spec.seed);
  Dataset ds;
  ds.shape = spec.shape;
  ds.n_classes = spec.n_classes;
  ds.items.reserve(spec.count);
  const double w = spec.shape.width - 1;
  const double h = spec.shape.height - 1;
  const double inv = 1.0 / (2.0 * spec.spot_sigma * spec.spot_sigma);
  for (int i = 0; i < spec.count; ++i) {
    const int cluster = i % spec.n_classes;
    const auto& mu = spec.means[cluster];
    const auto& cov = spec.covariances[cluster];
    // Cholesky of the 2x2 covariance.
    const double l00 = std::sqrt(cov[0]);
    const double l10 = cov[2] / l00;
    const double l11 = std::sqrt(cov[3] - l10 * l10);
    const double z0 = rng.Normal();
    const double z1 = rng.Normal();
    const double fx = mu[0] + l00 * z0;
    const double fy = mu[1] + l10 * z0 + l11 * z1;
    const double x = fx * w;
    const double y = fy * h;
    int label = cluster;
    if (spec.label_rule == BlobSpec::LabelRule::kNearestMean) {
      double best = std::numeric_limits<double>::infinity();
      for (int c = 0; c < spec.n_classes; ++c) {
        const double d = std::hypot(fx - spec.means[c][0], fy - spec.means[c][1]);
        if (d < best) {
          best = d;
          label = c;
        }
      }
    }
    const double amp = rng.Uniform(spec.intensity.lo, spec.intensity.hi);
    ImageTensor image(spec.shape);
    for (int r = 0; r < spec.shape.height; ++r) {
      for (int c = 0; c < spec.shape.width; ++c) {
        const double d2 = (c - x) * (c - x) + (r - y) * (r - y);
        const double base = amp * std::exp(-d2 * inv);
        for (int ch = 0; ch < spec.shape.channels; ++ch) {
          const double noise = spec.pixel_noise > 0.0 ? spec.pixel_noise * rng.Normal() : 0.0;
          image.at(r, c, ch) = static_cast<float>(base + noise);
        }
      }
    }
    ds.items.push_back({Quantize(std::move(image)), label});
  }
  return ds;
}

SeedSetResult BuildSeedSet(const Dataset& dataset, OracleClient& oracle,
                           int per_class, Rng& rng) {
  if (per_class < 1) throw Error(ErrorCode::kConfig, "per_class must be >= 1");
  const int n = oracle.n_classes();
  std::vector<std::vector<size_t>> correct(n);
  std::vector<Prediction> predictions;
  predictions.reserve(dataset.items.size());
  constexpr size_t kChunk = 256;
  for (size_t start = 0; start < dataset.items.size(); start += kChunk) {
    const size_t end = std::min(dataset.items.size(), start + kChunk);
    std::vector<ImageTensor> chunk;
    for (size_t i = start; i < end; ++i) chunk.push_back(dataset.items[i].image);
    for (Prediction& p : PredictBatch(oracle, chunk)) predictions.push_back(std::move(p));
  }
  for (size_t i = 0; i < dataset.items.size(); ++i) {
    const int label = dataset.items[i].label;
    if (label < 0 || label >= n) {
      throw Error(ErrorCode::kData, "label " + std::to_string(label) +
                                        " outside the oracle's " +
                                        std::to_string(n) + " classes");
    }
    if (predictions[i].output.predicted_class == label) correct[label].push_back(i);
  }

  SeedSetResult result;
  int64_t next_id = 0;
  for (int c = 0; c < n; ++c) {
    auto& pool = correct[c];
    if (pool.empty()) {
      result.skipped_classes.push_back(c);
      std::cerr << "warning: class " << c << " has no correctly classified image; skipped\n";
      continue;
    }
    if (static_cast<int>(pool.size()) < per_class) {
      result.short_classes.push_back(c);
      std::cerr << "warning: class " << c << " has only " << pool.size()
                << " correctly classified images (wanted " << per_class << ")\n";
    }
    const size_t take = std::min(pool.size(), static_cast<size_t>(per_class));
    // Partial Fisher-Yates: the first `take` entries become a uniform sample.
    for (size_t i = 0; i < take; ++i) {
      const size_t j = i + rng.UniformIndex(pool.size() - i);
      std::swap(pool[i], pool[j]);
    }
    std::vector<size_t> chosen(pool.begin(), pool.begin() + take);
    std::sort(chosen.begin(), chosen.end());
    for (size_t idx : chosen) {
      TestInput seed;
      seed.id = next_id++;
      seed.image = dataset.items[idx].image;
      seed.ground_truth = c;
      seed.seed_root_id = seed.id;
      seed.prediction = predictions[idx];
      result.pool.AddSeed(std::move(seed));
    }
  }
  if (result.pool.empty()) {
    throw Error(ErrorCode::kConfig, "no correctly classified image in any class");
  }
  return result;
}

}  // namespace codofuzz
