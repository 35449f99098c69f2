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

#ifndef CODOFUZZ_SUITE_IO_H_
#define CODOFUZZ_SUITE_IO_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "codofuzz/coverage.h"
#include "codofuzz/test_input.h"
#include "json.hpp"

namespace codofuzz {

// Suite directory layout:
//
//   suite.jsonl     one TestInputRecord per accepted input, in order
//   images/         <id>.png per accepted input (8-bit, lossless)
//   seeds.jsonl     the verified initial seeds, same record format
//   seeds/          <id>.png per seed
//   coverage.json   final CoverageSnapshot
//   report.json     FuzzReport
//   trace.csv       iteration,cdc,kcdc,accepts
//   manifest.json   SuiteManifest; written last
//
// Records are flushed one per line, so an interrupted run leaves a valid
// prefix of suite.jsonl.
inline constexpr int kSuiteFormatVersion = 1;

struct SuiteManifest {
  int version = kSuiteFormatVersion;
  std::string config_hash;
  std::string oracle;
  // Free-form counters, e.g. inputs, seeds, iterations.
  nlohmann::json counts = nlohmann::json::object();
  std::vector<int> skipped_classes;
  std::vector<int> short_classes;
  nlohmann::json metadata = nlohmann::json::object();
  // Relative path (forward slashes) to lowercase hex SHA-256.
  std::map<std::string, std::string> digests;
};

void to_json(nlohmann::json& j, const SuiteManifest& m);
void from_json(const nlohmann::json& j, SuiteManifest& m);

// Relative image path used for `input` ("images/000042.png" or
// "seeds/000042.png").
std::string SuiteImagePath(const TestInput& input, bool seed);

// Streams a suite to disk as inputs are accepted.
class SuiteWriter {
 public:
  // Creates the directory layout. With `append` the existing suite.jsonl is
  // extended (resume); otherwise it is truncated. Throws kIo.
  SuiteWriter(std::filesystem::path dir, bool append = false);

  const std::filesystem::path& dir() const { return dir_; }

  // Rewrites seeds.jsonl and seeds/.
  void WriteSeeds(const std::vector<TestInput>& seeds);
  // Writes the image, then the record line, then flushes.
  void Append(const TestInput& input);
  void WriteCoverage(const CoverageSnapshot& snapshot);
  void WriteJson(const std::string& name, const nlohmann::json& j);
  void WriteText(const std::string& name, const std::string& text);
  // Closes suite.jsonl, digests every file except manifest.json and
  // checkpoint.json, and writes manifest.json.
  void Finalize(SuiteManifest manifest);

 private:
  std::filesystem::path dir_;
  std::ofstream records_;
};

// Writes a complete suite (seeds, inputs, coverage if present, manifest).
void SaveSuite(const std::filesystem::path& dir, const TestSuite& suite,
               SuiteManifest manifest = {});

SuiteManifest LoadManifest(const std::filesystem::path& dir);

// Recomputes every digest listed in the manifest. Throws kCorruption on a
// missing file or a mismatch, kCorruption if manifest.json is absent.
void VerifySuiteDigests(const std::filesystem::path& dir);

// Reads suite.jsonl, seeds.jsonl and coverage.json when present. With
// `verify`, digests are checked first. Throws kParse naming the line on a
// malformed record, kData if a stored image disagrees with its record.
TestSuite LoadSuite(const std::filesystem::path& dir, bool verify = true);

// Reads one JSONL file of records whose images live under `dir`.
std::vector<TestInput> LoadRecords(const std::filesystem::path& dir,
                                   const std::string& jsonl_name);

}  // namespace codofuzz

#endif  // CODOFUZZ_SUITE_IO_H_
