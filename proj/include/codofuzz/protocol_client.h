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

#ifndef CODOFUZZ_PROTOCOL_CLIENT_H_
#define CODOFUZZ_PROTOCOL_CLIENT_H_

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "codofuzz/oracle.h"
#include "json.hpp"

namespace codofuzz {

// Base64 (RFC 4648, padded) of little-endian IEEE-754 binary32 values.
std::string EncodePixels(std::span<const float> pixels);
std::vector<float> DecodePixels(std::string_view base64);

// A bidirectional newline-delimited byte stream to a model server.
class LineTransport {
 public:
  virtual ~LineTransport() = default;
  // Throws kTransport on failure.
  virtual void WriteLine(std::string_view line) = 0;
  // Returns nullopt on timeout. Throws kTransport on EOF or read failure.
  virtual std::optional<std::string> ReadLine(
      std::chrono::milliseconds timeout) = 0;
  // Drops the current stream and opens a fresh one.
  virtual void Reconnect() = 0;
  virtual std::string Describe() const = 0;
};

// host:port over TCP.
std::unique_ptr<LineTransport> MakeTcpTransport(std::string host, int port);
// Spawns `/bin/sh -c command` and talks over its stdin/stdout.
std::unique_ptr<LineTransport> MakeCommandTransport(std::string command);

struct ProtocolOptions {
  std::chrono::milliseconds timeout{30000};
  // Extra attempts after the first failure of a request.
  int retries = 1;
};

// Oracle backed by a peer speaking the line-delimited JSON protocol:
//   -> {"op":"hello","version":1}
//   <- {"op":"model","n_classes":N,"input_shape":[H,W,C]}
//   -> {"op":"predict","id":u64,"shape":[H,W,C],"pixels":"<b64 f32le>"}
//   -> {"op":"predict","id":u64,"shape":[H,W,C],"count":n,
//       "pixels_batch":"<b64 of n images back to back>"}
//   <- {"op":"result","id":u64,"probs":[...]}        (single)
//   <- {"op":"result","id":u64,"probs":[[...],...]}  (batch)
//   <- {"op":"error","id":u64,"message":"..."}
// Responses may arrive out of order; ids correlate them. Every failed
// request is retried `retries` times (reconnecting first) before a
// TransportError is raised.
class ProtocolClient : public OracleClient {
 public:
  // Performs the handshake. Throws TransportError if it fails.
  ProtocolClient(std::unique_ptr<LineTransport> transport,
                 ProtocolOptions options = {});

  int n_classes() const override { return n_classes_; }
  ImageShape input_shape() const override { return input_shape_; }
  std::string Describe() const override { return transport_->Describe(); }

  std::vector<double> Probabilities(const ImageTensor& image) override;
  std::vector<std::vector<double>> ProbabilitiesBatch(
      std::span<const ImageTensor> images) override;

  uint64_t requests_sent() const { return next_id_ - 1; }

 private:
  void Handshake();
  nlohmann::json Exchange(const nlohmann::json& request, uint64_t id);
  // Runs `attempt` up to 1 + retries times, reconnecting between tries.
  template <typename Fn>
  auto WithRetry(std::string_view what, Fn&& attempt);

  std::unique_ptr<LineTransport> transport_;
  ProtocolOptions options_;
  int n_classes_ = 0;
  ImageShape input_shape_;
  uint64_t next_id_ = 1;
  std::map<uint64_t, nlohmann::json> early_;  // responses for other ids
};

// Opens an oracle from a descriptor:
//   builtin:<model.json> | tcp:<host>:<port> | cmd:<shell command>
std::unique_ptr<OracleClient> OpenOracle(std::string_view descriptor,
                                         ProtocolOptions options = {});

}  // namespace codofuzz

#endif  // CODOFUZZ_PROTOCOL_CLIENT_H_
