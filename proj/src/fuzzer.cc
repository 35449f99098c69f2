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

#include <algorithm>
#include <chrono>
#include <map>
#include <cstdio>
#include <iostream>
#include <utility>

#include "codofuzz/error.h"
#include "codofuzz/mutation.h"

namespace codofuzz {
namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::string_view StepOutcomeName(StepOutcome outcome) {
  switch (outcome) {
    case StepOutcome::kAccepted:
      return "accepted";
    case StepOutcome::kRejectedCoverage:
      return "rejected_coverage";
    case StepOutcome::kInvalid:
      return "invalid";
  }
  return "unknown";
}

void to_json(nlohmann::json& j, const TracePoint& t) {
  j = nlohmann::json{t.iteration, t.cdc, t.kcdc, t.accepts};
}

void from_json(const nlohmann::json& j, TracePoint& t) {
  t.iteration = j.at(0).get<int64_t>();
  t.cdc = j.at(1).get<double>();
  t.kcdc = j.at(2).get<double>();
  t.accepts = j.at(3).get<int64_t>();
}

void to_json(nlohmann::json& j, const FuzzReport& r) {
  j = nlohmann::json{{"suite_size", r.suite_size},
                     {"iterations", r.iterations},
                     {"accepted", r.accepted},
                     {"rejected_coverage", r.rejected_coverage},
                     {"invalid", r.invalid},
                     {"oracle_calls", r.oracle_calls},
                     {"cdc", r.cdc},
                     {"kcdc", r.kcdc},
                     {"seeds_verified", r.seeds_verified},
                     {"seeds_dropped", r.seeds_dropped},
                     {"seed_assignments", r.seed_assignments},
                     {"seed_cdc", r.seed_cdc},
                     {"seed_verification_seconds", r.seed_verification_seconds},
                     {"fuzz_seconds", r.fuzz_seconds},
                     {"stop_reason", r.stop_reason},
                     {"abort_message", r.abort_message},
                     {"trace", r.trace}};
}

void from_json(const nlohmann::json& j, FuzzReport& r) {
  try {
    r.suite_size = j.at("suite_size").get<int64_t>();
    r.iterations = j.at("iterations").get<int64_t>();
    r.accepted = j.at("accepted").get<int64_t>();
    r.rejected_coverage = j.at("rejected_coverage").get<int64_t>();
    r.invalid = j.at("invalid").get<int64_t>();
    r.oracle_calls = j.at("oracle_calls").get<int64_t>();
    r.cdc = j.at("cdc").get<double>();
    r.kcdc = j.at("kcdc").get<double>();
    r.seeds_verified = j.at("seeds_verified").get<int64_t>();
    r.seeds_dropped = j.at("seeds_dropped").get<int64_t>();
    r.seed_assignments = j.at("seed_assignments").get<int64_t>();
    r.seed_cdc = j.at("seed_cdc").get<double>();
    r.seed_verification_seconds = j.at("seed_verification_seconds").get<double>();
    r.fuzz_seconds = j.at("fuzz_seconds").get<double>();
    r.stop_reason = j.at("stop_reason").get<std::string>();
    r.abort_message = j.at("abort_message").get<std::string>();
    r.trace = j.at("trace").get<std::vector<TracePoint>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("fuzz report: ") + e.what());
  }
}

std::string TraceCsv(const FuzzReport& report) {
  std::string out = "iteration,cdc,kcdc,accepts\n";
  char row[128];
  for (const TracePoint& t : report.trace) {
    std::snprintf(row, sizeof(row), "%lld,%.17g,%.17g,%lld\n",
                  static_cast<long long>(t.iteration), t.cdc, t.kcdc,
                  static_cast<long long>(t.accepts));
    out += row;
  }
  return out;
}

void to_json(nlohmann::json& j, const FuzzCheckpoint& c) {
  j = nlohmann::json{{"config_hash", c.config_hash},
                     {"report", c.report},
                     {"next_id", c.next_id},
                     {"rng",
                      {{"schedule", c.schedule_rng},
                       {"mutate", c.mutate_rng},
                       {"accept", c.accept_rng}}},
                     {"times_selected", c.times_selected},
                     {"children_accepted", c.children_accepted},
                     {"coverage", c.coverage}};
}

void from_json(const nlohmann::json& j, FuzzCheckpoint& c) {
  try {
    c.config_hash = j.at("config_hash").get<std::string>();
    c.report = j.at("report").get<FuzzReport>();
    c.next_id = j.at("next_id").get<int64_t>();
    c.schedule_rng = j.at("rng").at("schedule").get<std::string>();
    c.mutate_rng = j.at("rng").at("mutate").get<std::string>();
    c.accept_rng = j.at("rng").at("accept").get<std::string>();
    c.times_selected = j.at("times_selected").get<std::vector<int64_t>>();
    c.children_accepted = j.at("children_accepted").get<std::vector<int64_t>>();
    c.coverage = j.at("coverage").get<CoverageSnapshot>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("checkpoint: ") + e.what());
  }
}

Fuzzer::Fuzzer(FuzzConfig config, OracleClient& oracle)
    : config_(std::move(config)),
      oracle_(&oracle),
      mutation_options_{config_.ranges, config_.allow_hflip},
      coverage_(oracle.n_classes(), config_.n_bins, config_.cap),
      schedule_rng_(DeriveSeed(config_.rng_seed, "schedule")),
      mutate_rng_(DeriveSeed(config_.rng_seed, "mutate")),
      accept_rng_(DeriveSeed(config_.rng_seed, "accept")) {
  config_.Validate();
}

Fuzzer::Fuzzer(FuzzConfig config, OracleClient& oracle, std::vector<TestInput> seeds)
    : Fuzzer(std::move(config), oracle) {
  const auto start = Clock::now();
  std::vector<ImageTensor> images;
  images.reserve(seeds.size());
  for (const TestInput& s : seeds) images.push_back(s.image);
  const std::vector<Prediction> predictions = PredictBatch(oracle, images);

  for (size_t i = 0; i < seeds.size(); ++i) {
    TestInput& seed = seeds[i];
    if (predictions[i].output.predicted_class != seed.ground_truth) {
      std::cerr << "warning: dropping seed " << seed.id << ": oracle predicts class "
                << predictions[i].output.predicted_class << ", label is "
                << seed.ground_truth << "\n";
      ++report_.seeds_dropped;
      continue;
    }
    seed.prediction = predictions[i];
    seed.lineage.clear();
    seed.seed_root_id = seed.id;
    seed.accepted_iteration = -1;
    next_id_ = std::max(next_id_, seed.id + 1);
    if (coverage_.Update(seed.prediction->output)) ++report_.seed_assignments;
    pool_.AddSeed(seed);
    seeds_.push_back(std::move(seed));
  }
  report_.seeds_verified = static_cast<int64_t>(seeds_.size());
  report_.seed_verification_seconds = SecondsSince(start);
  if (seeds_.empty()) {
    throw Error(ErrorCode::kConfig, "no correctly classified seed left after verification");
  }
  report_.seed_cdc = coverage_.CdcScore(config_.exclude_infeasible);
  RefreshScores();
}

Fuzzer Fuzzer::Resume(FuzzConfig config, OracleClient& oracle, std::vector<TestInput> seeds,
                      std::vector<TestInput> accepted, const FuzzCheckpoint& checkpoint) {
  if (checkpoint.config_hash != ConfigHash(config)) {
    throw Error(ErrorCode::kConfig, "checkpoint was written with a different configuration");
  }
  Fuzzer f(std::move(config), oracle);
  if (seeds.empty()) throw Error(ErrorCode::kCorruption, "resume: no seeds");
  f.report_ = checkpoint.report;
  f.report_.stop_reason.clear();
  f.report_.abort_message.clear();
  f.next_id_ = checkpoint.next_id;
  f.schedule_rng_ = Rng::Deserialize(checkpoint.schedule_rng);
  f.mutate_rng_ = Rng::Deserialize(checkpoint.mutate_rng);
  f.accept_rng_ = Rng::Deserialize(checkpoint.accept_rng);
  f.coverage_ = CoverageMatrix::FromSnapshot(checkpoint.coverage);
  if (f.coverage_.n_classes() != oracle.n_classes() ||
      f.coverage_.n_bins() != f.config_.n_bins || f.coverage_.cap() != f.config_.cap) {
    throw Error(ErrorCode::kCorruption, "resume: coverage dimensions disagree with config");
  }

  std::map<int64_t, size_t> seed_index;
  for (TestInput& seed : seeds) {
    if (!seed.prediction) throw Error(ErrorCode::kCorruption, "resume: seed without prediction");
    seed_index[seed.id] = f.seeds_.size();
    f.pool_.AddSeed(seed);
    f.seeds_.push_back(std::move(seed));
  }
  for (TestInput& input : accepted) {
    const auto it = seed_index.find(input.seed_root_id);
    if (it == seed_index.end()) {
      throw Error(ErrorCode::kCorruption,
                  "resume: input " + std::to_string(input.id) + " has unknown seed root");
    }
    ReplayResult replay = Replay(f.seeds_[it->second].image, input.lineage, f.config_.ranges);
    if (!(replay.image == input.image)) {
      throw Error(ErrorCode::kCorruption,
                  "resume: lineage replay of input " + std::to_string(input.id) +
                      " does not reproduce its image");
    }
    f.pool_.Add(std::move(input), std::move(replay.lineage));
  }
  if (checkpoint.times_selected.size() != f.pool_.size() ||
      checkpoint.children_accepted.size() != f.pool_.size()) {
    throw Error(ErrorCode::kCorruption, "resume: checkpoint pool size " +
                                            std::to_string(checkpoint.times_selected.size()) +
                                            " != stored pool size " +
                                            std::to_string(f.pool_.size()));
  }
  for (size_t i = 0; i < f.pool_.size(); ++i) {
    f.pool_.entry(i).times_selected = checkpoint.times_selected[i];
    f.pool_.entry(i).children_accepted = checkpoint.children_accepted[i];
  }
  if (f.report_.accepted != static_cast<int64_t>(accepted.size())) {
    throw Error(ErrorCode::kCorruption, "resume: checkpoint counts " +
                                            std::to_string(f.report_.accepted) +
                                            " accepted inputs, suite holds " +
                                            std::to_string(accepted.size()));
  }
  return f;
}

int64_t Fuzzer::Capacity() const {
  const int64_t cells = coverage_.DenominatorCells(/*exclude_infeasible=*/true);
  return cells * coverage_.cap() - report_.seed_assignments;
}

void Fuzzer::RefreshScores() {
  report_.cdc = coverage_.CdcScore(config_.exclude_infeasible);
  report_.kcdc = coverage_.KcdcScore(config_.exclude_infeasible);
  report_.suite_size = report_.accepted;
}

StepOutcome Fuzzer::Step() {
  const Rng schedule_before = schedule_rng_;
  const Rng mutate_before = mutate_rng_;

  const size_t parent_index = pool_.Select(schedule_rng_);
  const SeedEntry& parent = pool_.entry(parent_index);
  Mutant mutant = Mutate(parent.input.image, parent.input.id, parent.lineage,
                         mutation_options_, mutate_rng_);

  StepOutcome outcome;
  const bool valid =
      mutant.record.is_affine ||
      IsValid(parent.lineage.reference, mutant.candidate, config_.alpha, config_.beta);
  if (!valid) {
    outcome = StepOutcome::kInvalid;
    ++report_.invalid;
  } else {
    Prediction prediction;
    try {
      prediction = Predict(*oracle_, mutant.candidate);
    } catch (const TransportError&) {
      schedule_rng_ = schedule_before;
      mutate_rng_ = mutate_before;
      --pool_.entry(parent_index).times_selected;
      throw;
    }
    ++report_.oracle_calls;

    bool accept;
    if (config_.acceptance == AcceptancePolicy::kCoverage) {
      accept = coverage_.Update(prediction.output);
    } else {
      accept = accept_rng_.Uniform01() < config_.random_accept_probability &&
               report_.accepted < Capacity();
      if (accept) coverage_.Update(prediction.output);
    }

    if (accept) {
      TestInput child;
      child.id = next_id_++;
      child.ground_truth = parent.input.ground_truth;
      child.seed_root_id = parent.input.seed_root_id;
      child.lineage = parent.input.lineage;
      child.lineage.push_back(mutant.record);
      child.prediction = std::move(prediction);
      child.accepted_iteration = report_.iterations;
      LineageState lineage = Advance(parent.lineage, mutant.record, mutant.candidate);
      child.image = std::move(mutant.candidate);

      ++pool_.entry(parent_index).children_accepted;
      // `parent` may dangle after Add.
      pool_.Add(std::move(child), std::move(lineage));
      ++report_.accepted;
      outcome = StepOutcome::kAccepted;
    } else {
      ++report_.rejected_coverage;
      outcome = StepOutcome::kRejectedCoverage;
    }
  }

  ++report_.iterations;
  RefreshScores();
  report_.trace.push_back({report_.iterations, report_.cdc, report_.kcdc, report_.accepted});
  if (outcome == StepOutcome::kAccepted && on_accept_) on_accept_(pool_.entries().back().input);
  return outcome;
}

void Fuzzer::Run(const AcceptCallback& on_accept) {
  on_accept_ = on_accept;
  report_.stop_reason.clear();
  report_.abort_message.clear();
  const double spent = report_.fuzz_seconds;
  const auto start = Clock::now();
  while (true) {
    if (report_.iterations >= config_.max_iterations) {
      report_.stop_reason = "max_iterations";
      break;
    }
    if (spent + SecondsSince(start) >= config_.max_wall_seconds) {
      report_.stop_reason = "max_wall_seconds";
      break;
    }
    try {
      Step();
    } catch (const TransportError& e) {
      report_.stop_reason = "aborted";
      report_.abort_message = e.what();
      break;
    }
  }
  report_.fuzz_seconds = spent + SecondsSince(start);
  on_accept_ = nullptr;
}

std::vector<TestInput> Fuzzer::SuiteInputs() const {
  std::vector<TestInput> out;
  out.reserve(pool_.size() - seeds_.size());
  for (size_t i = seeds_.size(); i < pool_.size(); ++i) out.push_back(pool_.entry(i).input);
  return out;
}

FuzzCheckpoint Fuzzer::Checkpoint() const {
  FuzzCheckpoint c;
  c.config_hash = ConfigHash(config_);
  c.report = report_;
  c.next_id = next_id_;
  c.schedule_rng = schedule_rng_.Serialize();
  c.mutate_rng = mutate_rng_.Serialize();
  c.accept_rng = accept_rng_.Serialize();
  for (const SeedEntry& e : pool_.entries()) {
    c.times_selected.push_back(e.times_selected);
    c.children_accepted.push_back(e.children_accepted);
  }
  c.coverage = coverage_.Snapshot(report_.iterations, config_.exclude_infeasible);
  return c;
}

TestSuite Fuzzer::MakeSuite() const {
  TestSuite suite;
  suite.inputs = SuiteInputs();
  suite.seeds = seeds_;
  suite.coverage = coverage_.Snapshot(report_.iterations, config_.exclude_infeasible);
  return suite;
}

FuzzResult RunFuzz(const FuzzConfig& config, const SeedPool& seeds, OracleClient& oracle,
                   const AcceptCallback& on_accept) {
  std::vector<TestInput> inputs;
  inputs.reserve(seeds.size());
  for (const SeedEntry& e : seeds.entries()) inputs.push_back(e.input);
  Fuzzer fuzzer(config, oracle, std::move(inputs));
  fuzzer.Run(on_accept);
  return {fuzzer.MakeSuite(), fuzzer.report()};
}

}  // namespace codofuzz
