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

#include "codofuzz/config.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include "toml.hpp"

#include "codofuzz/error.h"
#include "codofuzz/image_io.h"

namespace codofuzz {
namespace {

std::string_view PolicyName(AcceptancePolicy p) {
  return p == AcceptancePolicy::kCoverage ? "cdc" : "random";
}

AcceptancePolicy ParsePolicy(std::string_view name) {
  if (name == "cdc") return AcceptancePolicy::kCoverage;
  if (name == "random") return AcceptancePolicy::kRandom;
  throw Error(ErrorCode::kConfig, "acceptance must be \"cdc\" or \"random\"");
}

class TableReader {
 public:
  TableReader(const toml::table& root, std::string name,
              std::set<std::string> allowed)
      : name_(std::move(name)) {
    if (const auto* t = root[name_].as_table()) {
      table_ = t;
      for (const auto& [key, _] : *t) {
        if (!allowed.contains(std::string(key.str()))) {
          throw Error(ErrorCode::kConfig,
                      "unknown key [" + name_ + "]." + std::string(key.str()));
        }
      }
    }
  }

  template <typename T>
  void Read(const char* key, T& out) const {
    if (!table_ || !table_->contains(key)) return;
    const toml::node& node = *table_->get(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!node.is_boolean()) Bad(key, "a boolean");
      out = *node.value<bool>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!node.is_number()) Bad(key, "a number");
      out = *node.value<double>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!node.is_integer()) Bad(key, "an integer");
      const int64_t v = *node.value<int64_t>();
      if constexpr (std::is_unsigned_v<T>) {
        if (v < 0) Bad(key, "a nonnegative integer");
      }
      out = static_cast<T>(v);
    } else {
      if (!node.is_string()) Bad(key, "a string");
      out = *node.value<std::string>();
    }
  }

  void ReadRange(const char* key, Range& out) const {
    if (!table_ || !table_->contains(key)) return;
    const toml::array* arr = table_->get(key)->as_array();
    if (!arr || arr->size() != 2 || !(*arr)[0].is_number() || !(*arr)[1].is_number()) {
      Bad(key, "[lo, hi]");
    }
    out = {*(*arr)[0].value<double>(), *(*arr)[1].value<double>()};
  }

 private:
  [[noreturn]] void Bad(const char* key, const char* what) const {
    throw Error(ErrorCode::kConfig, "[" + name_ + "]." + key + " must be " + what);
  }

  std::string name_;
  const toml::table* table_ = nullptr;
};

}  // namespace

void FuzzConfig::Validate() const {
  if (n_bins < 1) throw Error(ErrorCode::kConfig, "n_bins must be >= 1");
  if (cap < 1) throw Error(ErrorCode::kConfig, "cap must be >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorCode::kConfig, "alpha must be in (0,1]");
  if (!(beta > 0.0 && beta <= 1.0)) throw Error(ErrorCode::kConfig, "beta must be in (0,1]");
  if (max_iterations < 0) throw Error(ErrorCode::kConfig, "max_iterations must be >= 0");
  if (!(max_wall_seconds > 0.0)) {
    throw Error(ErrorCode::kConfig, "max_wall_seconds must be positive");
  }
  if (seeds_per_class < 1) throw Error(ErrorCode::kConfig, "seeds_per_class must be >= 1");
  if (!(random_accept_probability >= 0.0 && random_accept_probability <= 1.0)) {
    throw Error(ErrorCode::kConfig, "random_accept_probability must be in [0,1]");
  }
  ranges.Validate();
}

void to_json(nlohmann::json& j, const FuzzConfig& c) {
  j = nlohmann::json{{"n_bins", c.n_bins},
                     {"cap", c.cap},
                     {"exclude_infeasible", c.exclude_infeasible},
                     {"alpha", c.alpha},
                     {"beta", c.beta},
                     {"allow_hflip", c.allow_hflip},
                     {"ranges", c.ranges},
                     {"max_iterations", c.max_iterations},
                     {"max_wall_seconds", c.max_wall_seconds},
                     {"rng_seed", c.rng_seed},
                     {"seeds_per_class", c.seeds_per_class},
                     {"acceptance", PolicyName(c.acceptance)},
                     {"random_accept_probability", c.random_accept_probability}};
}

void from_json(const nlohmann::json& j, FuzzConfig& c) {
  try {
    c.n_bins = j.at("n_bins").get<int>();
    c.cap = j.at("cap").get<int>();
    c.exclude_infeasible = j.at("exclude_infeasible").get<bool>();
    c.alpha = j.at("alpha").get<double>();
    c.beta = j.at("beta").get<double>();
    c.allow_hflip = j.at("allow_hflip").get<bool>();
    c.ranges = j.at("ranges").get<TransformRanges>();
    c.max_iterations = j.at("max_iterations").get<int64_t>();
    c.max_wall_seconds = j.at("max_wall_seconds").get<double>();
    c.rng_seed = j.at("rng_seed").get<uint64_t>();
    c.seeds_per_class = j.at("seeds_per_class").get<int>();
    c.acceptance = ParsePolicy(j.at("acceptance").get<std::string>());
    c.random_accept_probability = j.at("random_accept_probability").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("config: ") + e.what());
  }
}

std::string ConfigHash(const FuzzConfig& config) {
  const std::string text = nlohmann::json(config).dump();
  return Sha256Hex(std::span(reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

FuzzConfig ParseFuzzConfigToml(std::string_view text) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "run config: " << e.description() << " at " << e.source().begin;
    throw Error(ErrorCode::kConfig, msg.str());
  }
  const std::set<std::string> tables = {"coverage", "mutation", "budget", "run"};
  for (const auto& [key, node] : root) {
    if (!tables.contains(std::string(key.str())) || !node.is_table()) {
      throw Error(ErrorCode::kConfig, "unknown table [" + std::string(key.str()) + "]");
    }
  }

  FuzzConfig c;
  const TableReader coverage(root, "coverage", {"n_bins", "cap", "exclude_infeasible"});
  coverage.Read("n_bins", c.n_bins);
  coverage.Read("cap", c.cap);
  coverage.Read("exclude_infeasible", c.exclude_infeasible);

  const TableReader mutation(
      root, "mutation",
      {"alpha", "beta", "allow_hflip", "rotation_max_degrees", "crop_min_area",
       "brightness", "contrast", "blur_sigma", "perspective_scale"});
  mutation.Read("alpha", c.alpha);
  mutation.Read("beta", c.beta);
  mutation.Read("allow_hflip", c.allow_hflip);
  mutation.Read("rotation_max_degrees", c.ranges.rotation_max_degrees);
  mutation.Read("crop_min_area", c.ranges.crop_min_area);
  mutation.ReadRange("brightness", c.ranges.brightness);
  mutation.ReadRange("contrast", c.ranges.contrast);
  mutation.ReadRange("blur_sigma", c.ranges.blur_sigma);
  mutation.Read("perspective_scale", c.ranges.perspective_scale);

  const TableReader budget(root, "budget", {"max_iterations", "max_wall_seconds"});
  budget.Read("max_iterations", c.max_iterations);
  budget.Read("max_wall_seconds", c.max_wall_seconds);

  const TableReader run(root, "run", {"rng_seed", "seeds_per_class", "acceptance",
                                      "random_accept_probability"});
  run.Read("rng_seed", c.rng_seed);
  run.Read("seeds_per_class", c.seeds_per_class);
  std::string policy(PolicyName(c.acceptance));
  run.Read("acceptance", policy);
  c.acceptance = ParsePolicy(policy);
  run.Read("random_accept_probability", c.random_accept_probability);

  c.Validate();
  return c;
}

FuzzConfig LoadFuzzConfig(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return ParseFuzzConfigToml(buf.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.message());
  }
}

}  // namespace codofuzz
