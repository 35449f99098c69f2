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

// codofuzz command line: fuzz, evaluate, rotate-correlate.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "codofuzz/config.h"
#include "codofuzz/dataset.h"
#include "codofuzz/error.h"
#include "codofuzz/evaluation.h"
#include "codofuzz/fuzzer.h"
#include "codofuzz/image_io.h"
#include "codofuzz/protocol_client.h"
#include "codofuzz/suite_io.h"

namespace codofuzz {
namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitResumable = 3;

constexpr char kCheckpointFile[] = "checkpoint.json";

struct FuzzArgs {
  std::string config;
  std::string seeds;
  std::string oracle;
  std::string out;
  bool resume = false;
};

struct EvaluateArgs {
  std::vector<std::string> suites;
  std::string out;
  int bins = 10;
};

struct RotateArgs {
  std::string data;
  std::string oracle;
  std::vector<double> degrees{0.0, 5.0, 10.0, 15.0};
  int bins = 10;
  int cap = 10;
  uint64_t seed = 0;
  std::string out;
};

nlohmann::json ReadJson(const fs::path& path) {
  const auto bytes = ReadFileBytes(path);
  try {
    return nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

std::vector<TestInput> Inputs(const SeedPool& pool) {
  std::vector<TestInput> out;
  for (const SeedEntry& e : pool.entries()) out.push_back(e.input);
  return out;
}

void LogReport(const FuzzReport& r) {
  std::fprintf(stderr,
               "iterations=%lld accepted=%lld rejected=%lld invalid=%lld cdc=%.4f kcdc=%.4f "
               "stop=%s seed_verification=%.2fs fuzz=%.2fs\n",
               static_cast<long long>(r.iterations), static_cast<long long>(r.accepted),
               static_cast<long long>(r.rejected_coverage), static_cast<long long>(r.invalid),
               r.cdc, r.kcdc, r.stop_reason.c_str(), r.seed_verification_seconds,
               r.fuzz_seconds);
}

// Writes the final artifacts. Returns the process exit code.
int FinishRun(SuiteWriter& writer, const Fuzzer& fuzzer, SuiteManifest manifest) {
  const FuzzReport& report = fuzzer.report();
  writer.WriteCoverage(fuzzer.coverage().Snapshot(report.iterations,
                                                  fuzzer.config().exclude_infeasible));
  writer.WriteJson("report.json", report);
  writer.WriteText("trace.csv", TraceCsv(report));
  std::error_code ec;
  if (fuzzer.aborted()) {
    writer.WriteJson(kCheckpointFile, fuzzer.Checkpoint());
  } else {
    fs::remove(writer.dir() / kCheckpointFile, ec);
  }
  manifest.config_hash = ConfigHash(fuzzer.config());
  manifest.counts["inputs"] = report.accepted;
  manifest.counts["seeds"] = static_cast<int64_t>(fuzzer.seeds().size());
  manifest.counts["iterations"] = report.iterations;
  manifest.metadata["status"] = fuzzer.aborted() ? "aborted" : "complete";
  manifest.metadata["stop_reason"] = report.stop_reason;
  writer.Finalize(std::move(manifest));
  LogReport(report);
  if (fuzzer.aborted()) {
    std::cerr << "oracle failed: " << report.abort_message << "\n"
              << "resumable: rerun with --resume --out " << writer.dir().string() << "\n";
    return kExitResumable;
  }
  return kExitOk;
}

int RunFuzzCommand(const FuzzArgs& args) {
  const FuzzConfig config = LoadFuzzConfig(args.config);
  std::unique_ptr<OracleClient> oracle = OpenOracle(args.oracle);
  const fs::path out(args.out);

  if (args.resume) {
    if (!fs::exists(out / kCheckpointFile)) {
      throw Error(ErrorCode::kConfig, "nothing to resume: no " + (out / kCheckpointFile).string());
    }
    const FuzzCheckpoint checkpoint = ReadJson(out / kCheckpointFile).get<FuzzCheckpoint>();
    SuiteManifest manifest = LoadManifest(out);
    TestSuite stored = LoadSuite(out, /*verify=*/true);
    Fuzzer fuzzer = Fuzzer::Resume(config, *oracle, std::move(stored.seeds),
                                   std::move(stored.inputs), checkpoint);
    std::cerr << "resuming at iteration " << fuzzer.report().iterations << "\n";
    SuiteWriter writer(out, /*append=*/true);
    fuzzer.Run([&](const TestInput& in) { writer.Append(in); });
    return FinishRun(writer, fuzzer, std::move(manifest));
  }

  if (args.seeds.empty()) throw Error(ErrorCode::kConfig, "--seeds is required");
  DatasetSource source = ParseDatasetSource(args.seeds);
  if (source.n_classes == 0) source.n_classes = oracle->n_classes();
  const Dataset dataset = LoadDataset(source);
  if (dataset.shape != oracle->input_shape()) {
    throw Error(ErrorCode::kConfig, "seed images are " + dataset.shape.ToString() +
                                        ", oracle expects " + oracle->input_shape().ToString());
  }
  Rng seed_rng(DeriveSeed(config.rng_seed, "seed-set"));
  SeedSetResult seeds = BuildSeedSet(dataset, *oracle, config.seeds_per_class, seed_rng);
  std::cerr << "seed set: " << seeds.pool.size() << " images from " << dataset.items.size()
            << "\n";

  Fuzzer fuzzer(config, *oracle, Inputs(seeds.pool));
  SuiteManifest manifest;
  manifest.oracle = oracle->Describe();
  manifest.skipped_classes = seeds.skipped_classes;
  manifest.short_classes = seeds.short_classes;
  manifest.metadata["seeds_source"] = args.seeds;
  manifest.metadata["seeds_dropped"] = fuzzer.report().seeds_dropped;

  SuiteWriter writer(out);
  writer.WriteSeeds(fuzzer.seeds());
  fuzzer.Run([&](const TestInput& in) { writer.Append(in); });
  return FinishRun(writer, fuzzer, std::move(manifest));
}

int InferClasses(const TestSuite& suite) {
  if (suite.coverage) return suite.coverage->n_classes;
  for (const auto* list : {&suite.inputs, &suite.seeds}) {
    for (const TestInput& in : *list) {
      if (in.prediction) return static_cast<int>(in.prediction->prob_vector.size());
    }
  }
  throw Error(ErrorCode::kData, "cannot determine the number of classes of an empty suite");
}

int RunEvaluateCommand(const EvaluateArgs& args) {
  std::vector<SuiteMetrics> metrics;
  std::vector<SuiteHistograms> histograms;
  for (const std::string& dir : args.suites) {
    const TestSuite suite = LoadSuite(dir, /*verify=*/true);
    const int n_classes = InferClasses(suite);
    const int n_bins = suite.coverage ? suite.coverage->n_bins : args.bins;
    metrics.push_back(ComputeMetrics(dir, suite.inputs, n_classes));
    histograms.push_back(ComputeHistograms(suite.inputs, n_classes, n_bins));
  }
  EmitReport(args.out, metrics, histograms);
  std::cout << MetricsCsv(metrics);
  return kExitOk;
}

int RunRotateCommand(const RotateArgs& args) {
  std::unique_ptr<OracleClient> oracle = OpenOracle(args.oracle);
  DatasetSource source = ParseDatasetSource(args.data);
  if (source.n_classes == 0) source.n_classes = oracle->n_classes();
  const Dataset data = LoadDataset(source);
  RotationOptions options;
  options.degrees = args.degrees;
  options.n_bins = args.bins;
  options.cap = args.cap;
  options.rng_seed = args.seed;
  const auto rows = RotationCorrelation(data, *oracle, options);
  const fs::path out(args.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out.string());
  const std::string csv = RotationCsv(rows);
  const std::string json = nlohmann::json{{"rows", rows}}.dump(2) + "\n";
  WriteFileBytes(out / "rotation.csv",
                 std::span(reinterpret_cast<const uint8_t*>(csv.data()), csv.size()));
  WriteFileBytes(out / "rotation.json",
                 std::span(reinterpret_cast<const uint8_t*>(json.data()), json.size()));
  std::cout << csv;
  return kExitOk;
}

int Main(int argc, char** argv) {
  CLI::App app{"Black-box fuzzing of image classifiers guided by co-domain coverage"};
  app.require_subcommand(1);

  FuzzArgs fuzz;
  CLI::App* fuzz_cmd = app.add_subcommand("fuzz", "Run a fuzzing campaign");
  fuzz_cmd->add_option("--config", fuzz.config, "Run configuration (TOML)")->required();
  fuzz_cmd->add_option("--seeds", fuzz.seeds,
                       "Seed data: idx:<images>,<labels> | blobs:<spec.json> | [png:]<dir>");
  fuzz_cmd->add_option("--oracle", fuzz.oracle,
                       "builtin:<model.json> | tcp:<host>:<port> | cmd:<command>")
      ->required();
  fuzz_cmd->add_option("--out", fuzz.out, "Suite directory")->required();
  fuzz_cmd->add_flag("--resume", fuzz.resume, "Continue an aborted run in --out");

  EvaluateArgs eval;
  CLI::App* eval_cmd = app.add_subcommand("evaluate", "Compute suite metrics");
  eval_cmd->add_option("--suite", eval.suites, "Suite directories")->required();
  eval_cmd->add_option("--out", eval.out, "Report directory")->required();
  eval_cmd->add_option("--bins", eval.bins, "Cell grid bins when a suite has no coverage.json")
      ->check(CLI::PositiveNumber);

  RotateArgs rot;
  CLI::App* rot_cmd =
      app.add_subcommand("rotate-correlate", "Coverage and errors on rotated test data");
  rot_cmd->add_option("--data", rot.data, "Labeled test data")->required();
  rot_cmd->add_option("--oracle", rot.oracle, "Oracle descriptor")->required();
  rot_cmd->add_option("--degrees", rot.degrees, "Maximum angles, ascending from 0")
      ->delimiter(',');
  rot_cmd->add_option("--bins", rot.bins, "Confidence bins M")->check(CLI::PositiveNumber);
  rot_cmd->add_option("--cap", rot.cap, "Cell capacity k")->check(CLI::PositiveNumber);
  rot_cmd->add_option("--seed", rot.seed, "Random seed");
  rot_cmd->add_option("--out", rot.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*fuzz_cmd) return RunFuzzCommand(fuzz);
    if (*eval_cmd) return RunEvaluateCommand(eval);
    if (*rot_cmd) return RunRotateCommand(rot);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitUsage;
}

}  // namespace
}  // namespace codofuzz

int main(int argc, char** argv) { return codofuzz::Main(argc, argv); }
