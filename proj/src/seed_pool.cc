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

#include "codofuzz/seed_pool.h"

#include "codofuzz/error.h"

namespace codofuzz {

void SeedPool::Add(TestInput input, LineageState lineage) {
  entries_.push_back(SeedEntry{std::move(input), std::move(lineage), 0, 0});
}

void SeedPool::AddSeed(TestInput input) {
  LineageState lineage = RootLineage(input.image);
  Add(std::move(input), std::move(lineage));
}

double SeedPool::Weight(size_t i) const {
  return 1.0 / (1.0 + static_cast<double>(entries_[i].times_selected));
}

size_t SeedPool::Select(Rng& rng) {
  if (entries_.empty()) throw Error(ErrorCode::kLogic, "select from empty seed pool");
  double total = 0.0;
  for (size_t i = 0; i < entries_.size(); ++i) total += Weight(i);
  double target = rng.Uniform01() * total;
  size_t chosen = entries_.size() - 1;
  for (size_t i = 0; i < entries_.size(); ++i) {
    target -= Weight(i);
    if (target < 0.0) {
      chosen = i;
      break;
    }
  }
  ++entries_[chosen].times_selected;
  return chosen;
}

}  // namespace codofuzz
