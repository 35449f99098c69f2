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

#include "codofuzz/mutation.h"

#include <cmath>
#include <string>

#include "codofuzz/error.h"

namespace codofuzz {

void to_json(nlohmann::json& j, const MutationRecord& r) {
  j = nlohmann::json{{"transform", r.transform},
                     {"is_affine", r.is_affine},
                     {"parent_id", r.parent_id},
                     {"rng_draws", r.rng_draws}};
}

void from_json(const nlohmann::json& j, MutationRecord& r) {
  try {
    r.transform = j.at("transform").get<Transform>();
    r.is_affine = j.at("is_affine").get<bool>();
    r.parent_id = j.at("parent_id").get<int64_t>();
    r.rng_draws = j.at("rng_draws").get<uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("mutation record: ") + e.what());
  }
  if (r.is_affine != IsAffine(r.kind())) {
    throw Error(ErrorCode::kParse, "mutation record affine flag disagrees with kind");
  }
}

LineageState RootLineage(const ImageTensor& seed) {
  return LineageState{seed, false, 0};
}

LineageState Advance(const LineageState& parent, const MutationRecord& record,
                     const ImageTensor& candidate) {
  if (record.is_affine) {
    if (parent.affine_used) {
      throw Error(ErrorCode::kLogic, "lineage already used its affine step");
    }
    return LineageState{candidate, true, parent.depth + 1};
  }
  return LineageState{parent.reference, parent.affine_used, parent.depth + 1};
}

std::vector<TransformKind> AdmissibleKinds(const LineageState& lineage,
                                           bool allow_hflip) {
  std::vector<TransformKind> kinds;
  for (TransformKind k : kAllTransformKinds) {
    if (k == TransformKind::kHorizontalFlip && !allow_hflip) continue;
    if (IsAffine(k) && lineage.affine_used) continue;
    kinds.push_back(k);
  }
  return kinds;
}

Mutant Mutate(const ImageTensor& image, int64_t parent_id,
              const LineageState& lineage, const MutationOptions& options,
              Rng& rng) {
  const uint64_t before = rng.draws();
  const auto kinds = AdmissibleKinds(lineage, options.allow_hflip);
  const TransformKind kind = kinds[rng.UniformIndex(kinds.size())];
  Transform t = SampleTransform(kind, image.shape(), options.ranges, rng);
  ImageTensor candidate = Quantize(ApplyTransform(image, t, options.ranges));
  MutationRecord record{std::move(t), IsAffine(kind), parent_id,
                        rng.draws() - before};
  return Mutant{std::move(candidate), std::move(record)};
}

bool IsValid(const ImageTensor& reference, const ImageTensor& candidate,
             double alpha, double beta) {
  if (reference.shape() != candidate.shape()) {
    throw Error(ErrorCode::kInput, "validity check on different shapes " +
                                       reference.shape().ToString() + " vs " +
                                       candidate.shape().ToString());
  }
  if (!(alpha > 0.0 && alpha <= 1.0) || !(beta > 0.0 && beta <= 1.0)) {
    throw Error(ErrorCode::kConfig, "alpha and beta must be in (0,1]");
  }
  size_t changed = 0;
  double max_delta = 0.0;
  const auto a = reference.pixels();
  const auto b = candidate.pixels();
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(static_cast<double>(b[i]) - a[i]);
    if (d > 0.0) ++changed;
    if (d > max_delta) max_delta = d;
  }
  return static_cast<double>(changed) <= alpha * static_cast<double>(a.size()) ||
         max_delta <= beta;
}

ReplayResult Replay(const ImageTensor& root,
                    std::span<const MutationRecord> records,
                    const TransformRanges& ranges) {
  ReplayResult out{root, RootLineage(root)};
  for (const MutationRecord& record : records) {
    if (record.is_affine && out.lineage.affine_used) {
      throw Error(ErrorCode::kData, "lineage applies more than one affine transform");
    }
    out.image = Quantize(ApplyTransform(out.image, record.transform, ranges));
    out.lineage = Advance(out.lineage, record, out.image);
  }
  return out;
}

}  // namespace codofuzz
