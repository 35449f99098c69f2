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

#ifndef CODOFUZZ_CONFIG_H_
#define CODOFUZZ_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "codofuzz/transforms.h"
#include "json.hpp"

namespace codofuzz {

// What decides whether a valid mutant joins the suite.
enum class AcceptancePolicy {
  kCoverage,  // co-domain coverage increases
  kRandom,    // coin flip with random_accept_probability (baseline)
};

struct FuzzConfig {
  int n_bins = 10;
  int cap = 10;
  bool exclude_infeasible = true;

  double alpha = 0.2;
  double beta = 0.5;
  bool allow_hflip = true;
  TransformRanges ranges;

  int64_t max_iterations = 10000;
  double max_wall_seconds = 21600.0;

  uint64_t rng_seed = 0;
  int seeds_per_class = 100;

  AcceptancePolicy acceptance = AcceptancePolicy::kCoverage;
  double random_accept_probability = 0.5;

  // Throws kConfig.
  void Validate() const;
};

void to_json(nlohmann::json& j, const FuzzConfig& c);
void from_json(const nlohmann::json& j, FuzzConfig& c);

// SHA-256 of the canonical JSON form.
std::string ConfigHash(const FuzzConfig& config);

// Reads the run configuration. Recognized keys (all optional):
//
//   [coverage]  n_bins, cap, exclude_infeasible
//   [mutation]  alpha, beta, allow_hflip, rotation_max_degrees,
//               crop_min_area, brightness = [lo, hi], contrast = [lo, hi],
//               blur_sigma = [lo, hi], perspective_scale
//   [budget]    max_iterations, max_wall_seconds
//   [run]       rng_seed, seeds_per_class, acceptance = "cdc" | "random",
//               random_accept_probability
//
// Unknown tables or keys are rejected. Throws kConfig.
FuzzConfig ParseFuzzConfigToml(std::string_view text);
FuzzConfig LoadFuzzConfig(const std::filesystem::path& path);

}  // namespace codofuzz

#endif  // CODOFUZZ_CONFIG_H_
