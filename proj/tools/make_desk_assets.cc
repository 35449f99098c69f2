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

// Writes the desk-scale assets: a synthetic blob dataset spec, a
// template-matching linear model fitted to a separate draw of the same
// distribution, and a run configuration.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "codofuzz/dataset.h"
#include "codofuzz/error.h"
#include "codofuzz/image_io.h"
#include "codofuzz/linear_model.h"

namespace codofuzz {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::string out = "data/desk";
  int n_classes = 3;
  int side = 16;
  double radius = 0.23;
  double stddev = 0.085;
  double spot_sigma = 1.5;
  double pixel_noise = 0.02;
  int count = 10000;
  int template_count = 6000;
  double scale = 4.0;
  uint64_t seed = 2026;
  bool nearest_mean_labels = true;
};

BlobSpec MakeSpec(const Options& o, uint64_t seed, int count) {
  BlobSpec s;
  s.n_classes = o.n_classes;
  s.shape = {o.side, o.side, 1};
  for (int c = 0; c < o.n_classes; ++c) {
    const double theta = (90.0 + 360.0 * c / o.n_classes) * std::numbers::pi / 180.0;
    s.means.push_back({0.5 + o.radius * std::cos(theta), 0.5 - o.radius * std::sin(theta)});
    s.covariances.push_back({o.stddev * o.stddev, 0.0, 0.0, o.stddev * o.stddev});
  }
  s.seed = seed;
  s.count = count;
  s.spot_sigma = o.spot_sigma;
  s.pixel_noise = o.pixel_noise;
  s.label_rule = o.nearest_mean_labels ? BlobSpec::LabelRule::kNearestMean
                                       : BlobSpec::LabelRule::kCluster;
  return s;
}

LinearSoftmaxModel FitTemplates(const Options& o, const BlobSpec& spec) {
  const Dataset train = GenerateBlobs(spec);
  const size_t d = train.shape.size();
  std::vector<std::vector<double>> templates(o.n_classes, std::vector<double>(d, 0.0));
  std::vector<int> counts(o.n_classes, 0);
  for (const LabeledImage& item : train.items) {
    const auto px = item.image.pixels();
    for (size_t i = 0; i < d; ++i) templates[item.label][i] += px[i];
    ++counts[item.label];
  }
  std::vector<double> mean(d, 0.0);
  for (int c = 0; c < o.n_classes; ++c) {
    for (size_t i = 0; i < d; ++i) {
      templates[c][i] /= counts[c];
      mean[i] += templates[c][i] / o.n_classes;
    }
  }
  std::vector<double> weights;
  weights.reserve(o.n_classes * d);
  for (int c = 0; c < o.n_classes; ++c) {
    for (size_t i = 0; i < d; ++i) weights.push_back(o.scale * (templates[c][i] - mean[i]));
  }
  return LinearSoftmaxModel(o.n_classes, train.shape, std::move(weights),
                            std::vector<double>(o.n_classes, 0.0));
}

void WriteText(const fs::path& path, const std::string& text) {
  WriteFileBytes(path, std::span(reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

constexpr char kRunToml[] = R"([coverage]
n_bins = 10
cap = 5
exclude_infeasible = true

[mutation]
alpha = 0.2
beta = 0.5
allow_hflip = false

[budget]
max_iterations = 2000
max_wall_seconds = 21600

[run]
rng_seed = 1
seeds_per_class = 20
acceptance = "cdc"
)";

int Main(int argc, char** argv) {
  Options o;
  CLI::App app{"Generate the desk-scale dataset spec, model and run config"};
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--radius", o.radius, "Cluster center distance from the image center");
  app.add_option("--stddev", o.stddev, "Cluster standard deviation");
  app.add_option("--spot-sigma", o.spot_sigma, "Spot width in pixels");
  app.add_option("--pixel-noise", o.pixel_noise, "Per-pixel noise");
  app.add_option("--count", o.count, "Images in the shipped dataset");
  app.add_option("--scale", o.scale, "Template weight scale");
  app.add_option("--seed", o.seed, "Dataset seed");
  app.add_option("--nearest-mean-labels", o.nearest_mean_labels,
                 "Label each image by its nearest class mean (else by cluster)");
  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(o.out);
    const BlobSpec spec = MakeSpec(o, o.seed, o.count);
    WriteText(fs::path(o.out) / "blobs.json", nlohmann::json(spec).dump(2) + "\n");
    const LinearSoftmaxModel model =
        FitTemplates(o, MakeSpec(o, o.seed + 1, o.template_count));
    model.Save(fs::path(o.out) / "model.json");
    WriteText(fs::path(o.out) / "run.toml", kRunToml);

    LinearSoftmaxModel eval = model;
    const Dataset test = GenerateBlobs(spec);
    int correct = 0;
    for (const LabeledImage& item : test.items) {
      correct += Predict(eval, item.image).output.predicted_class == item.label;
    }
    std::cout << "wrote " << o.out << "; model accuracy on blobs.json: "
              << static_cast<double>(correct) / test.items.size() << "\n";
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace
}  // namespace codofuzz

int main(int argc, char** argv) { return codofuzz::Main(argc, argv); }
