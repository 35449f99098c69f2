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

#ifndef CODOFUZZ_RNG_H_
#define CODOFUZZ_RNG_H_

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace codofuzz {

// Deterministic random stream. The underlying engine (mt19937_64) has a
// standardized output sequence; every derived quantity below is computed
// here rather than through <random> distributions, whose algorithms are
// implementation-defined. That keeps runs reproducible across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() {
    ++draws_;
    return engine_();
  }

  // Uniform in [0, 1) with 53 random bits.
  double Uniform01() { return static_cast<double>(NextU64() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform01(); }

  // Unbiased integer in [0, n). n must be positive.
  uint64_t UniformIndex(uint64_t n);

  // Standard normal via Box-Muller; consumes two draws, no caching.
  double Normal();

  uint64_t draws() const { return draws_; }

  // Full engine state plus draw counter, for checkpoints.
  std::string Serialize() const;
  static Rng Deserialize(const std::string& state);

 private:
  Rng() = default;

  std::mt19937_64 engine_;
  uint64_t draws_ = 0;
};

// Derives an independent sub-seed for a named stream (e.g. "schedule",
// "mutate") from a base seed with FNV-1a over the name and a splitmix64
// finalizer.
uint64_t DeriveSeed(uint64_t base, std::string_view stream);

}  // namespace codofuzz

#endif  // CODOFUZZ_RNG_H_
