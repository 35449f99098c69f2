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

#include "codofuzz/suite_io.h"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "codofuzz/error.h"
#include "codofuzz/image_io.h"

namespace codofuzz {
namespace fs = std::filesystem;

namespace {

constexpr char kRecords[] = "suite.jsonl";
constexpr char kSeedRecords[] = "seeds.jsonl";
constexpr char kManifest[] = "manifest.json";
constexpr char kCheckpoint[] = "checkpoint.json";
constexpr char kCoverage[] = "coverage.json";

void WriteTextFile(const fs::path& path, const std::string& text) {
  WriteFileBytes(path, std::span(reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

std::string ReadTextFile(const fs::path& path) {
  const auto bytes = ReadFileBytes(path);
  return std::string(bytes.begin(), bytes.end());
}

nlohmann::json ReadJsonFile(const fs::path& path) {
  try {
    return nlohmann::json::parse(ReadTextFile(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

std::string JsonText(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace

void to_json(nlohmann::json& j, const SuiteManifest& m) {
  j = nlohmann::json{{"version", m.version},
                     {"config_hash", m.config_hash},
                     {"oracle", m.oracle},
                     {"counts", m.counts},
                     {"skipped_classes", m.skipped_classes},
                     {"short_classes", m.short_classes},
                     {"metadata", m.metadata},
                     {"digests", m.digests}};
}

void from_json(const nlohmann::json& j, SuiteManifest& m) {
  try {
    m.version = j.at("version").get<int>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.oracle = j.at("oracle").get<std::string>();
    m.counts = j.at("counts");
    m.skipped_classes = j.at("skipped_classes").get<std::vector<int>>();
    m.short_classes = j.at("short_classes").get<std::vector<int>>();
    m.metadata = j.value("metadata", nlohmann::json::object());
    m.digests = j.at("digests").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("manifest: ") + e.what());
  }
  if (m.version != kSuiteFormatVersion) {
    throw Error(ErrorCode::kParse, "unsupported suite format version " + std::to_string(m.version));
  }
}

std::string SuiteImagePath(const TestInput& input, bool seed) {
  char name[32];
  std::snprintf(name, sizeof(name), "%06lld.png", static_cast<long long>(input.id));
  return std::string(seed ? "seeds/" : "images/") + name;
}

SuiteWriter::SuiteWriter(fs::path dir, bool append) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_ / "images", ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + (dir_ / "images").string());
  fs::remove(dir_ / kManifest, ec);
  records_.open(dir_ / kRecords, std::ios::binary | (append ? std::ios::app : std::ios::trunc));
  if (!records_) throw Error(ErrorCode::kIo, "cannot open " + (dir_ / kRecords).string());
}

void SuiteWriter::WriteSeeds(const std::vector<TestInput>& seeds) {
  std::error_code ec;
  fs::remove_all(dir_ / "seeds", ec);
  fs::create_directories(dir_ / "seeds", ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + (dir_ / "seeds").string());
  std::string text;
  for (const TestInput& seed : seeds) {
    const std::string path = SuiteImagePath(seed, /*seed=*/true);
    WritePng(dir_ / path, seed.image);
    text += TestInputRecord(seed, path).dump() + "\n";
  }
  WriteTextFile(dir_ / kSeedRecords, text);
}

void SuiteWriter::Append(const TestInput& input) {
  const std::string path = SuiteImagePath(input, /*seed=*/false);
  WritePng(dir_ / path, input.image);
  records_ << TestInputRecord(input, path).dump() << '\n';
  records_.flush();
  if (!records_) throw Error(ErrorCode::kIo, "write failed: " + (dir_ / kRecords).string());
}

void SuiteWriter::WriteCoverage(const CoverageSnapshot& snapshot) {
  WriteJson(kCoverage, snapshot);
}

void SuiteWriter::WriteJson(const std::string& name, const nlohmann::json& j) {
  WriteTextFile(dir_ / name, JsonText(j));
}

void SuiteWriter::WriteText(const std::string& name, const std::string& text) {
  WriteTextFile(dir_ / name, text);
}

void SuiteWriter::Finalize(SuiteManifest manifest) {
  records_.close();
  manifest.digests.clear();
  for (const auto& e : fs::recursive_directory_iterator(dir_)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = e.path().lexically_relative(dir_).generic_string();
    if (rel == kManifest || rel == kCheckpoint) continue;
    manifest.digests[rel] = Sha256File(e.path());
  }
  WriteJson(kManifest, manifest);
}

void SaveSuite(const fs::path& dir, const TestSuite& suite, SuiteManifest manifest) {
  SuiteWriter writer(dir);
  writer.WriteSeeds(suite.seeds);
  for (const TestInput& input : suite.inputs) writer.Append(input);
  if (suite.coverage) writer.WriteCoverage(*suite.coverage);
  manifest.counts["inputs"] = suite.inputs.size();
  manifest.counts["seeds"] = suite.seeds.size();
  if (!suite.metadata.empty()) manifest.metadata = suite.metadata;
  writer.Finalize(std::move(manifest));
}

SuiteManifest LoadManifest(const fs::path& dir) {
  if (!fs::exists(dir / kManifest)) {
    throw Error(ErrorCode::kCorruption, "missing " + (dir / kManifest).string());
  }
  return ReadJsonFile(dir / kManifest).get<SuiteManifest>();
}

void VerifySuiteDigests(const fs::path& dir) {
  const SuiteManifest manifest = LoadManifest(dir);
  for (const auto& [rel, digest] : manifest.digests) {
    const fs::path path = dir / rel;
    if (!fs::is_regular_file(path)) {
      throw Error(ErrorCode::kCorruption, "missing suite file " + rel);
    }
    const std::string actual = Sha256File(path);
    if (actual != digest) {
      throw Error(ErrorCode::kCorruption,
                  "digest mismatch for " + rel + ": manifest " + digest + ", file " + actual);
    }
  }
  if (!manifest.digests.contains(kRecords)) {
    throw Error(ErrorCode::kCorruption, "manifest does not cover suite.jsonl");
  }
}

std::vector<TestInput> LoadRecords(const fs::path& dir, const std::string& jsonl_name) {
  std::vector<TestInput> out;
  const fs::path path = dir / jsonl_name;
  if (!fs::exists(path)) return out;
  std::istringstream lines(ReadTextFile(path));
  std::string line;
  for (int lineno = 1; std::getline(lines, line); ++lineno) {
    if (line.empty()) continue;
    std::string image_path;
    TestInput input;
    ImageShape shape;
    try {
      const auto j = nlohmann::json::parse(line);
      input = ParseTestInputRecord(j, &image_path);
      shape = j.at("shape").get<ImageShape>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, jsonl_name + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), jsonl_name + ":" + std::to_string(lineno) + ": " + e.message());
    }
    input.image = ReadPng(dir / image_path, shape.channels);
    if (input.image.shape() != shape) {
      throw Error(ErrorCode::kData, image_path + " has shape " + input.image.shape().ToString() +
                                        ", record says " + shape.ToString());
    }
    out.push_back(std::move(input));
  }
  return out;
}

TestSuite LoadSuite(const fs::path& dir, bool verify) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIo, "no suite directory " + dir.string());
  TestSuite suite;
  if (verify) {
    VerifySuiteDigests(dir);
    suite.metadata = LoadManifest(dir).metadata;
  } else if (fs::exists(dir / kManifest)) {
    suite.metadata = LoadManifest(dir).metadata;
  }
  suite.inputs = LoadRecords(dir, kRecords);
  suite.seeds = LoadRecords(dir, kSeedRecords);
  if (fs::exists(dir / kCoverage)) {
    const CoverageSnapshot snap = ReadJsonFile(dir / kCoverage).get<CoverageSnapshot>();
    (void)CoverageMatrix::FromSnapshot(snap);  // validates
    suite.coverage = snap;
  }
  return suite;
}

}  // namespace codofuzz
