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

#ifndef CODOFUZZ_SEED_POOL_H_
#define CODOFUZZ_SEED_POOL_H_

#include <cstdint>
#include <vector>

#include "codofuzz/mutation.h"
#include "codofuzz/rng.h"
#include "codofuzz/test_input.h"

namespace codofuzz {

struct SeedEntry {
  TestInput input;
  LineageState lineage;
  int64_t times_selected = 0;
  int64_t children_accepted = 0;
};

// Seeds available for mutation: the verified initial seeds followed by every
// accepted mutant, in acceptance order.
class SeedPool {
 public:
  void Add(TestInput input, LineageState lineage);
  // Initial seed: lineage rooted at its own image.
  void AddSeed(TestInput input);

  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const SeedEntry& entry(size_t i) const { return entries_[i]; }
  SeedEntry& entry(size_t i) { return entries_[i]; }
  const std::vector<SeedEntry>& entries() const { return entries_; }

  // Selection weight 1 / (1 + times_selected): seeds that have been fuzzed
  // less are preferred.
  double Weight(size_t i) const;

  // Samples an index with probability proportional to Weight and
  // increments its times_selected. Throws kLogic on an empty pool.
  size_t Select(Rng& rng);

 private:
  std::vector<SeedEntry> entries_;
};

}  // namespace codofuzz

#endif  // CODOFUZZ_SEED_POOL_H_
