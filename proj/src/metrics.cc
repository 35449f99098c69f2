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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "codofuzz/error.h"
#include "codofuzz/evaluation.h"

namespace codofuzz {
namespace {

const Prediction& PredictionOf(const TestInput& in) {
  if (!in.prediction) {
    throw Error(ErrorCode::kData, "input " + std::to_string(in.id) + " has no prediction");
  }
  return *in.prediction;
}

void RequireNonEmpty(std::span<const TestInput> inputs, const char* metric) {
  if (inputs.empty()) {
    throw Error(ErrorCode::kData, std::string(metric) + " is undefined for an empty suite");
  }
}

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string FormatOptional(const std::optional<double>& v) {
  return v ? FormatDouble(*v) : std::string();
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

}  // namespace

int64_t MisclassifiedCount(std::span<const TestInput> inputs) {
  int64_t n = 0;
  for (const TestInput& in : inputs) {
    n += PredictionOf(in).output.predicted_class != in.ground_truth;
  }
  return n;
}

double PredictiveEntropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double AvgEntropy(std::span<const TestInput> inputs) {
  RequireNonEmpty(inputs, "avg_entropy");
  double sum = 0.0;
  for (const TestInput& in : inputs) sum += PredictiveEntropy(PredictionOf(in).prob_vector);
  return sum / static_cast<double>(inputs.size());
}

double OutputImpartiality(std::span<const TestInput> inputs, int n_classes) {
  RequireNonEmpty(inputs, "output_impartiality");
  if (n_classes < 2) throw Error(ErrorCode::kData, "output_impartiality needs >= 2 classes");
  std::vector<int64_t> hist(n_classes, 0);
  for (const TestInput& in : inputs) {
    const int c = PredictionOf(in).output.predicted_class;
    if (c < 0 || c >= n_classes) {
      throw Error(ErrorCode::kData, "predicted class " + std::to_string(c) + " out of range");
    }
    ++hist[c];
  }
  std::vector<double> frac;
  for (int64_t h : hist) frac.push_back(static_cast<double>(h) / inputs.size());
  return PredictiveEntropy(frac) / std::log(static_cast<double>(n_classes));
}

std::set<std::pair<int, int>> ErrorTypes(std::span<const TestInput> inputs) {
  std::set<std::pair<int, int>> out;
  for (const TestInput& in : inputs) {
    const int p = PredictionOf(in).output.predicted_class;
    if (p != in.ground_truth) out.emplace(in.ground_truth, p);
  }
  return out;
}

int DistinctErrorTypes(std::span<const TestInput> inputs) {
  return static_cast<int>(ErrorTypes(inputs).size());
}

int DistinctClasses(std::span<const TestInput> inputs) {
  std::set<int> classes;
  for (const TestInput& in : inputs) classes.insert(PredictionOf(in).output.predicted_class);
  return static_cast<int>(classes.size());
}

void to_json(nlohmann::json& j, const SuiteMetrics& m) {
  j = nlohmann::json{{"name", m.name},
                     {"n_classes", m.n_classes},
                     {"n_inputs", m.n_inputs},
                     {"n_misclassified", m.n_misclassified},
                     {"avg_entropy", nullptr},
                     {"output_impartiality", nullptr},
                     {"distinct_classes", m.distinct_classes},
                     {"distinct_error_types", m.distinct_error_types},
                     {"error_types", m.error_types}};
  if (m.avg_entropy) j["avg_entropy"] = *m.avg_entropy;
  if (m.output_impartiality) j["output_impartiality"] = *m.output_impartiality;
}

void from_json(const nlohmann::json& j, SuiteMetrics& m) {
  try {
    m.name = j.at("name").get<std::string>();
    m.n_classes = j.at("n_classes").get<int>();
    m.n_inputs = j.at("n_inputs").get<int64_t>();
    m.n_misclassified = j.at("n_misclassified").get<int64_t>();
    const auto& e = j.at("avg_entropy");
    m.avg_entropy = e.is_null() ? std::nullopt : std::optional<double>(e.get<double>());
    const auto& oi = j.at("output_impartiality");
    m.output_impartiality = oi.is_null() ? std::nullopt : std::optional<double>(oi.get<double>());
    m.distinct_classes = j.at("distinct_classes").get<int>();
    m.distinct_error_types = j.at("distinct_error_types").get<int>();
    m.error_types = j.at("error_types").get<std::vector<std::pair<int, int>>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("metrics: ") + e.what());
  }
}

SuiteMetrics ComputeMetrics(std::string name, std::span<const TestInput> inputs,
                            int n_classes) {
  SuiteMetrics m;
  m.name = std::move(name);
  m.n_classes = n_classes;
  m.n_inputs = static_cast<int64_t>(inputs.size());
  m.n_misclassified = MisclassifiedCount(inputs);
  if (!inputs.empty()) {
    m.avg_entropy = AvgEntropy(inputs);
    m.output_impartiality = OutputImpartiality(inputs, n_classes);
  }
  m.distinct_classes = DistinctClasses(inputs);
  const auto types = ErrorTypes(inputs);
  m.error_types.assign(types.begin(), types.end());
  m.distinct_error_types = static_cast<int>(types.size());
  return m;
}

SuiteHistograms ComputeHistograms(std::span<const TestInput> inputs, int n_classes,
                                  int n_bins) {
  if (n_classes < 1 || n_bins < 1) {
    throw Error(ErrorCode::kConfig, "histograms need positive class and bin counts");
  }
  SuiteHistograms h;
  h.confidence.resize(kConfidenceHistogramBins);
  h.predicted_class.resize(n_classes);
  h.n_bins = n_bins;
  h.cells.resize(static_cast<size_t>(n_classes) * n_bins);
  for (const TestInput& in : inputs) {
    const OutputTuple& out = PredictionOf(in).output;
    if (out.predicted_class < 0 || out.predicted_class >= n_classes) {
      throw Error(ErrorCode::kData, "predicted class " + std::to_string(out.predicted_class) +
                                        " out of range");
    }
    const bool correct = out.predicted_class == in.ground_truth;
    auto bump = [correct](SplitCount& s) { ++(correct ? s.correct : s.misclassified); };
    bump(h.confidence[BinIndex(out.confidence, kConfidenceHistogramBins)]);
    bump(h.predicted_class[out.predicted_class]);
    bump(h.cells[static_cast<size_t>(out.predicted_class) * n_bins +
                 BinIndex(out.confidence, n_bins)]);
  }
  return h;
}

std::string MetricsCsv(const std::vector<SuiteMetrics>& metrics) {
  std::string out =
      "suite,n_inputs,n_misclassified,avg_entropy,output_impartiality,distinct_classes,"
      "distinct_error_types\n";
  for (const SuiteMetrics& m : metrics) {
    out += m.name + "," + std::to_string(m.n_inputs) + "," + std::to_string(m.n_misclassified) +
           "," + FormatOptional(m.avg_entropy) + "," + FormatOptional(m.output_impartiality) +
           "," + std::to_string(m.distinct_classes) + "," +
           std::to_string(m.distinct_error_types) + "\n";
  }
  return out;
}

std::string ConfidenceHistogramCsv(const SuiteHistograms& h) {
  std::string out = "bin,lo,hi,correct,misclassified\n";
  const int n = static_cast<int>(h.confidence.size());
  for (int b = 0; b < n; ++b) {
    out += std::to_string(b) + "," + FormatDouble(static_cast<double>(b) / n) + "," +
           FormatDouble(static_cast<double>(b + 1) / n) + "," +
           std::to_string(h.confidence[b].correct) + "," +
           std::to_string(h.confidence[b].misclassified) + "\n";
  }
  return out;
}

std::string ClassHistogramCsv(const SuiteHistograms& h) {
  std::string out = "class,correct,misclassified\n";
  for (size_t c = 0; c < h.predicted_class.size(); ++c) {
    out += std::to_string(c) + "," + std::to_string(h.predicted_class[c].correct) + "," +
           std::to_string(h.predicted_class[c].misclassified) + "\n";
  }
  return out;
}

std::string CellGridCsv(const SuiteHistograms& h) {
  std::string out = "class,bin,correct,misclassified\n";
  for (size_t i = 0; i < h.cells.size(); ++i) {
    out += std::to_string(i / h.n_bins) + "," + std::to_string(i % h.n_bins) + "," +
           std::to_string(h.cells[i].correct) + "," + std::to_string(h.cells[i].misclassified) +
           "\n";
  }
  return out;
}

void EmitReport(const std::filesystem::path& out_dir, const std::vector<SuiteMetrics>& metrics,
                const std::vector<SuiteHistograms>& histograms) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out_dir.string());
  WriteText(out_dir / "metrics.json", nlohmann::json{{"suites", metrics}}.dump(2) + "\n");
  WriteText(out_dir / "metrics.csv", MetricsCsv(metrics));
  for (size_t i = 0; i < histograms.size(); ++i) {
    const std::string prefix = "suite" + std::to_string(i) + "_";
    WriteText(out_dir / (prefix + "confidence.csv"), ConfidenceHistogramCsv(histograms[i]));
    WriteText(out_dir / (prefix + "classes.csv"), ClassHistogramCsv(histograms[i]));
    WriteText(out_dir / (prefix + "cells.csv"), CellGridCsv(histograms[i]));
  }
}

std::vector<SuiteMetrics> ReadMetricsJson(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in).at("suites").get<std::vector<SuiteMetrics>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

}  // namespace codofuzz
