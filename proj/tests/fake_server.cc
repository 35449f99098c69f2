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

#include "fake_server.h"

#include <unistd.h>

#include <string>

#include "codofuzz/error.h"
#include "codofuzz/protocol_client.h"
#include "json.hpp"

namespace codofuzz::testing {
namespace {

bool ReadLine(int fd, std::string& buffer, std::string& line) {
  for (;;) {
    const size_t nl = buffer.find('\n');
    if (nl != std::string::npos) {
      line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      return true;
    }
    char chunk[65536];
    const ssize_t n = ::read(fd, chunk, sizeof(chunk));
    if (n <= 0) return false;
    buffer.append(chunk, static_cast<size_t>(n));
  }
}

void WriteLine(int fd, const nlohmann::json& j) {
  std::string text = j.dump();
  text.push_back('\n');
  size_t off = 0;
  while (off < text.size()) {
    const ssize_t n = ::write(fd, text.data() + off, text.size() - off);
    if (n <= 0) return;
    off += static_cast<size_t>(n);
  }
}

nlohmann::json Probs(LinearSoftmaxModel& model, const ImageTensor& image) {
  nlohmann::json out = nlohmann::json::array();
  // Wire precision is binary32.
  for (double p : model.Probabilities(image)) out.push_back(static_cast<float>(p));
  return out;
}

}  // namespace

int ServeStream(int in_fd, int out_fd, const LinearSoftmaxModel& model_in,
                const FakeServerOptions& options,
                std::atomic<int>* requests_seen) {
  LinearSoftmaxModel model = model_in;
  std::string buffer, line;
  int predicts = 0;
  while (ReadLine(in_fd, buffer, line)) {
    nlohmann::json req;
    try {
      req = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      WriteLine(out_fd, {{"op", "error"}, {"id", 0}, {"message", "malformed JSON"}});
      continue;
    }
    const uint64_t id = req.value("id", uint64_t{0});
    const std::string op = req.value("op", "");
    if (op == "hello") {
      WriteLine(out_fd, {{"op", "model"},
                         {"n_classes", model.n_classes()},
                         {"input_shape", model.input_shape()}});
      continue;
    }
    if (op != "predict") {
      WriteLine(out_fd, {{"op", "error"}, {"id", id}, {"message", "unknown op"}});
      continue;
    }
    ++predicts;
    if (requests_seen) ++*requests_seen;
    if (options.die_after > 0 && predicts >= options.die_after) return predicts;
    if (options.silent) continue;
    if (options.error_every > 0 && predicts % options.error_every == 0) {
      WriteLine(out_fd, {{"op", "error"}, {"id", id}, {"message", "injected"}});
      continue;
    }
    try {
      const ImageShape shape = req.at("shape").get<ImageShape>();
      nlohmann::json probs;
      if (req.contains("pixels_batch")) {
        const auto count = req.at("count").get<size_t>();
        const auto px = DecodePixels(req.at("pixels_batch").get<std::string>());
        if (px.size() != count * shape.size()) throw Error(ErrorCode::kInput, "batch size");
        probs = nlohmann::json::array();
        for (size_t i = 0; i < count; ++i) {
          std::vector<float> one(px.begin() + i * shape.size(),
                                 px.begin() + (i + 1) * shape.size());
          probs.push_back(Probs(model, ImageTensor(shape, std::move(one))));
        }
      } else {
        auto px = DecodePixels(req.at("pixels").get<std::string>());
        probs = Probs(model, ImageTensor(shape, std::move(px)));
      }
      if (options.stale_first && id > 1) {
        WriteLine(out_fd, {{"op", "result"}, {"id", id - 1}, {"probs", probs}});
      }
      WriteLine(out_fd, {{"op", "result"}, {"id", id}, {"probs", probs}});
    } catch (const std::exception& e) {
      WriteLine(out_fd, {{"op", "error"}, {"id", id}, {"message", e.what()}});
    }
  }
  return predicts;
}

}  // namespace codofuzz::testing
