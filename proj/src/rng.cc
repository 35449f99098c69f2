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

#include "codofuzz/rng.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "codofuzz/error.h"

namespace codofuzz {

uint64_t Rng::UniformIndex(uint64_t n) {
  if (n == 0) throw Error(ErrorCode::kLogic, "UniformIndex over empty range");
  // Rejection sampling on the largest multiple of n below 2^64.
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = NextU64();
  } while (x >= limit);
  return x % n;
}

double Rng::Normal() {
  double u1 = Uniform01();
  const double u2 = Uniform01();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::string Rng::Serialize() const {
  std::ostringstream out;
  out << draws_ << ' ' << engine_;
  return out.str();
}

Rng Rng::Deserialize(const std::string& state) {
  std::istringstream in(state);
  Rng rng;
  in >> rng.draws_ >> rng.engine_;
  if (in.fail()) throw Error(ErrorCode::kParse, "bad rng state");
  return rng;
}

uint64_t DeriveSeed(uint64_t base, std::string_view stream) {
  uint64_t h = 1469598103934665603ULL;
  for (char ch : stream) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ULL;
  }
  uint64_t z = base ^ h;
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace codofuzz
