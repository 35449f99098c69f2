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

#ifndef CODOFUZZ_MUTATION_H_
#define CODOFUZZ_MUTATION_H_

#include <cstdint>
#include <span>
#include <vector>

#include "codofuzz/image.h"
#include "codofuzz/rng.h"
#include "codofuzz/transforms.h"
#include "json.hpp"

namespace codofuzz {

struct MutationRecord {
  Transform transform;
  bool is_affine = false;
  int64_t parent_id = -1;
  // Raw draws consumed from the mutation stream for this step.
  uint64_t rng_draws = 0;

  TransformKind kind() const { return KindOf(transform); }
};

void to_json(nlohmann::json& j, const MutationRecord& r);
void from_json(const nlohmann::json& j, MutationRecord& r);

// Metamorphic bookkeeping for one lineage. Pixel-level changes are measured
// against `reference`, which is the original seed until the lineage's single
// affine step and that step's output afterwards.
struct LineageState {
  ImageTensor reference;
  bool affine_used = false;
  int depth = 0;
};

LineageState RootLineage(const ImageTensor& seed);

// State of the child produced from `parent` by `record` with output
// `candidate`.
LineageState Advance(const LineageState& parent, const MutationRecord& record,
                     const ImageTensor& candidate);

struct MutationOptions {
  TransformRanges ranges;
  // Off for orientation-sensitive data (digits, house numbers).
  bool allow_hflip = true;
};

// Kinds that may extend this lineage: everything allowed by the options,
// minus the affine kinds once the lineage has used its affine step. Never
// empty.
std::vector<TransformKind> AdmissibleKinds(const LineageState& lineage,
                                           bool allow_hflip);

struct Mutant {
  ImageTensor candidate;  // quantized to 8 bits
  MutationRecord record;
};

// Picks an admissible kind uniformly, samples its parameters and applies it
// to `image` (the current seed, id `parent_id`).
Mutant Mutate(const ImageTensor& image, int64_t parent_id,
              const LineageState& lineage, const MutationOptions& options,
              Rng& rng);

// Metamorphic closeness check for a pixel-level step: true iff at most
// alpha * size components differ from `reference`, or every component
// differs by at most beta (on the [0, 1] scale).
// Throws kInput on a shape mismatch and kConfig unless alpha and beta are in
// (0, 1].
bool IsValid(const ImageTensor& reference, const ImageTensor& candidate,
             double alpha, double beta);

struct ReplayResult {
  ImageTensor image;
  LineageState lineage;
};

// Re-applies `records` to `root` (quantizing after every step, as Mutate
// does). Throws kData if the records use more than one affine transform.
ReplayResult Replay(const ImageTensor& root,
                    std::span<const MutationRecord> records,
                    const TransformRanges& ranges);

}  // namespace codofuzz

#endif  // CODOFUZZ_MUTATION_H_
