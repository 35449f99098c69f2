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

#include "codofuzz/fuzzer.h"

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "codofuzz/config.h"
#include "codofuzz/coverage.h"
#include "codofuzz/error.h"
#include "codofuzz/image_io.h"
#include "codofuzz/mutation.h"
#include "codofuzz/seed_pool.h"
#include "codofuzz/suite_io.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace codofuzz {
namespace {

using ::codofuzz::testing::ConstantOracle;
using ::codofuzz::testing::CountingOracle;
using ::codofuzz::testing::FlakyOracle;
using ::codofuzz::testing::FreshDir;
using ::codofuzz::testing::RandomLinearModel;
using ::codofuzz::testing::SelfLabeledSeeds;

constexpr ImageShape kShape{8, 8, 1};

FuzzConfig SmallConfig(int64_t iterations, uint64_t seed = 1) {
  FuzzConfig c;
  c.n_bins = 10;
  c.cap = 3;
  c.max_iterations = iterations;
  c.rng_seed = seed;
  return c;
}

std::vector<std::string> Records(const std::vector<TestInput>& inputs) {
  std::vector<std::string> out;
  for (const auto& in : inputs) out.push_back(TestInputRecord(in, "").dump());
  return out;
}

void ExpectCounters(const FuzzReport& r) {
  EXPECT_EQ(r.accepted + r.rejected_coverage + r.invalid, r.iterations);
  EXPECT_EQ(r.suite_size, r.accepted);
  EXPECT_EQ(r.oracle_calls, r.accepted + r.rejected_coverage);
  ASSERT_EQ(static_cast<int64_t>(r.trace.size()), r.iterations);
  for (size_t i = 0; i < r.trace.size(); ++i) {
    EXPECT_EQ(r.trace[i].iteration, static_cast<int64_t>(i) + 1);
    if (i > 0) {
      EXPECT_GE(r.trace[i].cdc, r.trace[i - 1].cdc);
      EXPECT_GE(r.trace[i].kcdc, r.trace[i - 1].kcdc);
      EXPECT_GE(r.trace[i].accepts, r.trace[i - 1].accepts);
    }
  }
}

TEST(FuzzerTest, ZeroIterationsGivesEmptySuite) {
  auto model = RandomLinearModel(3, kShape, 1);
  const SeedPool seeds = SelfLabeledSeeds(model, 6, 2);
  const FuzzResult r = RunFuzz(SmallConfig(0), seeds, model);
  EXPECT_TRUE(r.suite.inputs.empty());
  EXPECT_EQ(r.report.iterations, 0);
  EXPECT_EQ(r.report.stop_reason, "max_iterations");
  EXPECT_EQ(r.suite.seeds.size(), 6u);
}

TEST(FuzzerTest, ConstantOracleFillsOneCell) {
  ConstantOracle oracle(10, kShape);
  SeedPool seeds;
  Rng rng(3);
  for (int i = 0; i < 4; ++i) {
    TestInput in;
    in.id = i;
    in.seed_root_id = i;
    in.image = testing::RandomImage(kShape, rng);
    in.ground_truth = 0;
    seeds.AddSeed(in);
  }
  FuzzConfig config = SmallConfig(500);
  config.cap = 3;
  const FuzzResult r = RunFuzz(config, seeds, oracle);
  // Seeds and mutants all land in (0, M-1), which holds three inputs.
  EXPECT_LE(r.report.accepted, 3);
  EXPECT_EQ(r.report.accepted + r.report.seed_assignments, 3);
  ExpectCounters(r.report);
}

TEST(FuzzerTest, DeterministicForSameSeed) {
  auto model = RandomLinearModel(3, kShape, 4);
  const SeedPool seeds = SelfLabeledSeeds(model, 8, 5);
  const FuzzResult a = RunFuzz(SmallConfig(400, 9), seeds, model);
  const FuzzResult b = RunFuzz(SmallConfig(400, 9), seeds, model);
  const FuzzResult c = RunFuzz(SmallConfig(400, 10), seeds, model);
  ASSERT_GT(a.suite.inputs.size(), 0u);
  EXPECT_EQ(Records(a.suite.inputs), Records(b.suite.inputs));
  for (size_t i = 0; i < a.suite.inputs.size(); ++i) {
    EXPECT_EQ(a.suite.inputs[i].image, b.suite.inputs[i].image);
  }
  EXPECT_EQ(a.suite.coverage, b.suite.coverage);
  EXPECT_EQ(a.report.trace, b.report.trace);
  EXPECT_NE(Records(a.suite.inputs), Records(c.suite.inputs));
}

TEST(FuzzerTest, InvalidMutantsNeverReachTheOracle) {
  auto model = RandomLinearModel(3, kShape, 6);
  const SeedPool seeds = SelfLabeledSeeds(model, 5, 7);
  CountingOracle counting(model);
  FuzzConfig config = SmallConfig(600);
  config.alpha = 1e-6;
  config.beta = 1e-6;
  const FuzzResult r = RunFuzz(config, seeds, counting);
  EXPECT_GT(r.report.invalid, 0);
  ExpectCounters(r.report);
  // 5 seed verification calls plus one per valid mutant.
  EXPECT_EQ(counting.calls(), 5 + r.report.accepted + r.report.rejected_coverage);
}

TEST(FuzzerTest, SuiteMatchesCoverageUpdates) {
  auto model = RandomLinearModel(4, kShape, 8);
  const SeedPool seeds = SelfLabeledSeeds(model, 10, 9);
  FuzzConfig config = SmallConfig(1500);
  config.n_bins = 8;
  config.cap = 2;
  Fuzzer fuzzer(config, model, [&] {
    std::vector<TestInput> v;
    for (const auto& e : seeds.entries()) v.push_back(e.input);
    return v;
  }());
  fuzzer.Run();
  const FuzzReport& r = fuzzer.report();
  ExpectCounters(r);
  const auto suite = fuzzer.SuiteInputs();
  EXPECT_EQ(static_cast<int64_t>(suite.size()),
            fuzzer.coverage().total_assigned() - r.seed_assignments);
  EXPECT_LE(static_cast<int64_t>(suite.size()), fuzzer.Capacity());
  EXPECT_LE(static_cast<int64_t>(suite.size()), 4 * 8 * 2);

  // Replaying seeds then suite through a fresh matrix: every suite input
  // is a successful update and the final matrices agree.
  CoverageMatrix replay(4, 8, 2);
  for (const auto& seed : fuzzer.seeds()) replay.Update(seed.prediction->output);
  for (const auto& in : suite) {
    ASSERT_TRUE(in.prediction.has_value());
    EXPECT_TRUE(replay.Update(in.prediction->output)) << "input " << in.id;
  }
  EXPECT_EQ(replay, fuzzer.coverage());
}

TEST(FuzzerTest, LineagesReplayAndUseOneAffineStep) {
  auto model = RandomLinearModel(3, kShape, 10);
  const SeedPool seeds = SelfLabeledSeeds(model, 6, 11);
  const FuzzResult r = RunFuzz(SmallConfig(1500, 3), seeds, model);
  std::map<int64_t, const TestInput*> by_id;
  for (const auto& s : r.suite.seeds) by_id[s.id] = &s;
  ASSERT_GT(r.suite.inputs.size(), 5u);
  for (const auto& in : r.suite.inputs) {
    int affine = 0;
    for (const auto& rec : in.lineage) affine += rec.is_affine;
    EXPECT_LE(affine, 1);
    const ReplayResult replay =
        Replay(by_id.at(in.seed_root_id)->image, in.lineage, SmallConfig(0).ranges);
    EXPECT_EQ(replay.image, in.image) << "input " << in.id;
    EXPECT_EQ(in.ground_truth, by_id.at(in.seed_root_id)->ground_truth);
    by_id[in.id] = &in;
  }
}

TEST(FuzzerTest, DropsMisclassifiedSeeds) {
  auto model = RandomLinearModel(3, kShape, 12);
  SeedPool seeds = SelfLabeledSeeds(model, 6, 13);
  seeds.entry(2).input.ground_truth = (seeds.entry(2).input.ground_truth + 1) % 3;
  const FuzzResult r = RunFuzz(SmallConfig(10), seeds, model);
  EXPECT_EQ(r.report.seeds_dropped, 1);
  EXPECT_EQ(r.report.seeds_verified, 5);
  for (const auto& s : r.suite.seeds) EXPECT_NE(s.id, 2);

  SeedPool wrong;
  for (const auto& e : seeds.entries()) {
    TestInput in = e.input;
    in.ground_truth = (in.prediction->output.predicted_class + 1) % 3;
    wrong.AddSeed(in);
  }
  try {
    RunFuzz(SmallConfig(10), wrong, model);
    FAIL() << "expected a configuration error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
  }
}

TEST(FuzzerTest, WallClockBudgetStopsBetweenIterations) {
  auto model = RandomLinearModel(3, kShape, 14);
  const SeedPool seeds = SelfLabeledSeeds(model, 3, 15);
  FuzzConfig config = SmallConfig(1000000);
  config.max_wall_seconds = 1e-9;
  const FuzzResult r = RunFuzz(config, seeds, model);
  EXPECT_EQ(r.report.stop_reason, "max_wall_seconds");
  EXPECT_LE(r.report.iterations, 1);
}

TEST(FuzzerTest, RandomPolicyRespectsProbabilityAndCapacity) {
  auto model = RandomLinearModel(3, kShape, 16);
  const SeedPool seeds = SelfLabeledSeeds(model, 4, 17);
  FuzzConfig config = SmallConfig(800);
  config.acceptance = AcceptancePolicy::kRandom;
  config.random_accept_probability = 0.0;
  EXPECT_EQ(RunFuzz(config, seeds, model).report.accepted, 0);

  config.random_accept_probability = 1.0;
  config.cap = 1;
  const FuzzResult all = RunFuzz(config, seeds, model);
  ExpectCounters(all.report);
  const int64_t capacity = 3 * (10 - 3) * 1 - all.report.seed_assignments;
  EXPECT_EQ(all.report.accepted, std::min(capacity, all.report.oracle_calls));
}

TEST(FuzzerTest, AbortAndResumeMatchesUninterruptedRun) {
  auto model = RandomLinearModel(3, kShape, 18);
  const SeedPool seeds = SelfLabeledSeeds(model, 6, 19);
  const FuzzConfig config = SmallConfig(700, 5);
  const FuzzResult full = RunFuzz(config, seeds, model);

  // Seed verification uses calls 0..5; fail from call 200 onwards.
  FlakyOracle flaky(model, 200, 1000000);
  std::vector<TestInput> seed_inputs;
  for (const auto& e : seeds.entries()) seed_inputs.push_back(e.input);
  Fuzzer first(config, flaky, seed_inputs);
  first.Run();
  ASSERT_TRUE(first.aborted());
  EXPECT_LT(first.report().iterations, 700);
  ExpectCounters(first.report());

  // Round-trip everything through disk, as the CLI does.
  const auto dir = FreshDir("resume");
  SuiteWriter writer(dir);
  writer.WriteSeeds(first.seeds());
  for (const auto& in : first.SuiteInputs()) writer.Append(in);
  writer.WriteJson("checkpoint.json", first.Checkpoint());
  writer.Finalize({});
  const TestSuite stored = LoadSuite(dir);
  const auto bytes = ReadFileBytes(dir / "checkpoint.json");
  const FuzzCheckpoint checkpoint =
      nlohmann::json::parse(bytes.begin(), bytes.end()).get<FuzzCheckpoint>();

  Fuzzer resumed = Fuzzer::Resume(config, model, stored.seeds, stored.inputs, checkpoint);
  resumed.Run();
  EXPECT_FALSE(resumed.aborted());
  EXPECT_EQ(Records(resumed.SuiteInputs()), Records(full.suite.inputs));
  EXPECT_EQ(resumed.MakeSuite().coverage, full.suite.coverage);
  EXPECT_EQ(resumed.report().trace, full.report.trace);
  EXPECT_EQ(resumed.report().iterations, full.report.iterations);

  FuzzConfig other = config;
  other.cap = 4;
  EXPECT_THROW(Fuzzer::Resume(other, model, stored.seeds, stored.inputs, checkpoint), Error);
}

TEST(FuzzerTest, ReportJsonRoundTrip) {
  auto model = RandomLinearModel(3, kShape, 20);
  const FuzzResult r = RunFuzz(SmallConfig(50), SelfLabeledSeeds(model, 3, 21), model);
  const FuzzReport back = nlohmann::json(r.report).get<FuzzReport>();
  EXPECT_EQ(nlohmann::json(back), nlohmann::json(r.report));
  const std::string csv = TraceCsv(r.report);
  EXPECT_EQ(csv.rfind("iteration,cdc,kcdc,accepts\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 51);
}

TEST(SeedPoolTest, SingleSeedAlwaysSelected) {
  SeedPool pool;
  pool.AddSeed(TestInput{.image = ImageTensor(kShape)});
  Rng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(pool.Select(rng), 0u);
  EXPECT_EQ(pool.entry(0).times_selected, 100);
}

TEST(SeedPoolTest, EmptyPoolIsLogicError) {
  SeedPool pool;
  Rng rng(1);
  try {
    pool.Select(rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLogic);
  }
}

TEST(SeedPoolTest, TenElevenths) {
  SeedPool pool;
  pool.AddSeed(TestInput{.id = 0, .image = ImageTensor(kShape)});
  pool.AddSeed(TestInput{.id = 1, .image = ImageTensor(kShape)});
  Rng rng(42);
  int first = 0;
  constexpr int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i) {
    pool.entry(0).times_selected = 0;
    pool.entry(1).times_selected = 9;
    first += pool.Select(rng) == 0;
  }
  EXPECT_NEAR(static_cast<double>(first) / kDraws, 10.0 / 11.0, 0.01);
}

TEST(SeedPoolTest, FrequenciesMatchWeightsChiSquare) {
  const std::vector<int64_t> counts = {0, 1, 2, 3, 4};
  SeedPool pool;
  for (size_t i = 0; i < counts.size(); ++i) {
    pool.AddSeed(TestInput{.id = static_cast<int64_t>(i), .image = ImageTensor(kShape)});
  }
  double total = 0;
  for (int64_t c : counts) total += 1.0 / (1.0 + c);
  Rng rng(7);
  constexpr int kDraws = 50000;
  std::vector<int> hits(counts.size(), 0);
  for (int d = 0; d < kDraws; ++d) {
    for (size_t i = 0; i < counts.size(); ++i) pool.entry(i).times_selected = counts[i];
    ++hits[pool.Select(rng)];
  }
  double chi2 = 0;
  for (size_t i = 0; i < counts.size(); ++i) {
    const double expected = kDraws * (1.0 / (1.0 + counts[i])) / total;
    chi2 += (hits[i] - expected) * (hits[i] - expected) / expected;
  }
  // 99.9th percentile of chi-square with 4 degrees of freedom.
  EXPECT_LT(chi2, 18.467);
}

TEST(ConfigTest, DefaultsAndOverrides) {
  const FuzzConfig d = ParseFuzzConfigToml("");
  EXPECT_EQ(d.max_iterations, 10000);
  EXPECT_EQ(d.max_wall_seconds, 21600.0);
  EXPECT_EQ(d.alpha, 0.2);
  EXPECT_EQ(d.beta, 0.5);
  EXPECT_TRUE(d.exclude_infeasible);

  const FuzzConfig c = ParseFuzzConfigToml(R"(
[coverage]
n_bins = 20
cap = 5
exclude_infeasible = false
[mutation]
allow_hflip = false
brightness = [0.9, 1.1]
rotation_max_degrees = 10
[budget]
max_iterations = 42
max_wall_seconds = 60
[run]
rng_seed = 7
acceptance = "random"
random_accept_probability = 0.25
)");
  EXPECT_EQ(c.n_bins, 20);
  EXPECT_EQ(c.cap, 5);
  EXPECT_FALSE(c.exclude_infeasible);
  EXPECT_FALSE(c.allow_hflip);
  EXPECT_EQ(c.ranges.brightness.lo, 0.9);
  EXPECT_EQ(c.ranges.rotation_max_degrees, 10.0);
  EXPECT_EQ(c.max_iterations, 42);
  EXPECT_EQ(c.max_wall_seconds, 60.0);
  EXPECT_EQ(c.rng_seed, 7u);
  EXPECT_EQ(c.acceptance, AcceptancePolicy::kRandom);
  EXPECT_EQ(nlohmann::json(c).get<FuzzConfig>().n_bins, 20);
  EXPECT_EQ(ConfigHash(c), ConfigHash(nlohmann::json(c).get<FuzzConfig>()));
  EXPECT_NE(ConfigHash(c), ConfigHash(d));
}

TEST(ConfigTest, RejectsBadInput) {
  for (const char* text : {"[coverage]\ncap = 0\n", "[coverage]\nbins = 3\n",
                           "[extra]\nx = 1\n", "[budget]\nmax_iterations = \"ten\"\n",
                           "[mutation]\nbeta = 1.5\n", "[run]\nacceptance = \"greedy\"\n",
                           "[budget]\nmax_wall_seconds = 0\n", "[coverage\n"}) {
    try {
      ParseFuzzConfigToml(text);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kConfig) << text;
    }
  }
}

}  // namespace
}  // namespace codofuzz
