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

#ifndef CODOFUZZ_FUZZER_H_
#define CODOFUZZ_FUZZER_H_

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "codofuzz/config.h"
#include "codofuzz/coverage.h"
#include "codofuzz/oracle.h"
#include "codofuzz/rng.h"
#include "codofuzz/seed_pool.h"
#include "codofuzz/test_input.h"
#include "json.hpp"

namespace codofuzz {

enum class StepOutcome { kAccepted, kRejectedCoverage, kInvalid };
std::string_view StepOutcomeName(StepOutcome outcome);

struct TracePoint {
  int64_t iteration = 0;  // 1-based count of finished iterations
  double cdc = 0.0;
  double kcdc = 0.0;
  int64_t accepts = 0;

  friend bool operator==(const TracePoint&, const TracePoint&) = default;
};

struct FuzzReport {
  int64_t suite_size = 0;
  int64_t iterations = 0;
  int64_t accepted = 0;
  int64_t rejected_coverage = 0;
  int64_t invalid = 0;
  // Oracle calls made by the loop (seed verification excluded).
  int64_t oracle_calls = 0;
  double cdc = 0.0;
  double kcdc = 0.0;

  int64_t seeds_verified = 0;
  int64_t seeds_dropped = 0;
  // Coverage updates that succeeded while pre-inserting seeds.
  int64_t seed_assignments = 0;
  double seed_cdc = 0.0;
  double seed_verification_seconds = 0.0;
  double fuzz_seconds = 0.0;

  // "max_iterations", "max_wall_seconds" or "aborted".
  std::string stop_reason;
  std::string abort_message;
  std::vector<TracePoint> trace;
};

void to_json(nlohmann::json& j, const TracePoint& t);
void from_json(const nlohmann::json& j, TracePoint& t);
void to_json(nlohmann::json& j, const FuzzReport& r);
void from_json(const nlohmann::json& j, FuzzReport& r);

// "iteration,cdc,kcdc,accepts" header plus one row per trace point.
std::string TraceCsv(const FuzzReport& report);

// Loop state needed to continue an aborted run exactly where it stopped.
// The pool itself is rebuilt from the suite's seeds and accepted inputs.
struct FuzzCheckpoint {
  std::string config_hash;
  FuzzReport report;
  int64_t next_id = 0;
  std::string schedule_rng;
  std::string mutate_rng;
  std::string accept_rng;
  std::vector<int64_t> times_selected;
  std::vector<int64_t> children_accepted;
  CoverageSnapshot coverage;
};

void to_json(nlohmann::json& j, const FuzzCheckpoint& c);
void from_json(const nlohmann::json& j, FuzzCheckpoint& c);

using AcceptCallback = std::function<void(const TestInput&)>;

// The fuzzing loop. Each iteration selects a seed, mutates it, rejects
// invalid mutants without querying the oracle, predicts on valid ones and
// accepts those that pass the acceptance policy. Accepted inputs join both
// the suite and the seed pool.
//
// Random streams: DeriveSeed(rng_seed, "schedule"), "mutate" and "accept".
// The accept stream is only drawn from under the random policy, so both
// policies see the same schedule and mutation streams up to their first
// differing decision.
class Fuzzer {
 public:
  // Re-predicts every seed and drops the misclassified ones (warning on
  // stderr), then inserts the survivors into the coverage matrix.
  // Throws kConfig if no seed survives.
  Fuzzer(FuzzConfig config, OracleClient& oracle, std::vector<TestInput> seeds);

  // Rebuilds the state captured by `checkpoint`. `seeds` are the verified
  // seeds and `accepted` the suite so far, both as stored by the run.
  // Throws kConfig on a config mismatch and kCorruption on inconsistent
  // state.
  static Fuzzer Resume(FuzzConfig config, OracleClient& oracle,
                       std::vector<TestInput> seeds,
                       std::vector<TestInput> accepted,
                       const FuzzCheckpoint& checkpoint);

  // One iteration. On an oracle TransportError every random stream and
  // counter is rolled back to the state before the call and the error is
  // rethrown.
  StepOutcome Step();

  // Steps until a budget is exhausted or the oracle fails for good. The
  // callback sees every accepted input in order.
  void Run(const AcceptCallback& on_accept = {});

  bool aborted() const { return report_.stop_reason == "aborted"; }
  const FuzzConfig& config() const { return config_; }
  const FuzzReport& report() const { return report_; }
  const CoverageMatrix& coverage() const { return coverage_; }
  const SeedPool& pool() const { return pool_; }
  const std::vector<TestInput>& seeds() const { return seeds_; }
  // Accepted inputs in acceptance order.
  std::vector<TestInput> SuiteInputs() const;
  // Upper bound on accepted inputs: free capacity after seed insertion.
  int64_t Capacity() const;

  FuzzCheckpoint Checkpoint() const;
  TestSuite MakeSuite() const;

 private:
  Fuzzer(FuzzConfig config, OracleClient& oracle);
  void RefreshScores();

  FuzzConfig config_;
  OracleClient* oracle_;
  MutationOptions mutation_options_;
  CoverageMatrix coverage_;
  SeedPool pool_;
  std::vector<TestInput> seeds_;
  Rng schedule_rng_;
  Rng mutate_rng_;
  Rng accept_rng_;
  int64_t next_id_ = 0;
  FuzzReport report_;
  AcceptCallback on_accept_;
};

struct FuzzResult {
  TestSuite suite;
  FuzzReport report;
};

// Runs a fresh fuzzing campaign over `seeds`.
FuzzResult RunFuzz(const FuzzConfig& config, const SeedPool& seeds,
                   OracleClient& oracle, const AcceptCallback& on_accept = {});

}  // namespace codofuzz

#endif  // CODOFUZZ_FUZZER_H_
