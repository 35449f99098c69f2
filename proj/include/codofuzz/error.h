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

#ifndef CODOFUZZ_ERROR_H_
#define CODOFUZZ_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace codofuzz {

// Error categories surfaced by the engine. Each maps to a distinct failure
// class callers may want to handle differently (e.g. the fuzz CLI turns
// kTransport into a resumable abort).
enum class ErrorCode {
  kConfig,      // invalid configuration or unusable setup
  kInput,       // a caller-supplied value violates a precondition
  kTransport,   // oracle peer failed or timed out
  kData,        // dataset / suite content is missing or inconsistent
  kParse,       // malformed on-disk or on-wire bytes
  kCorruption,  // digest mismatch against a manifest
  kIo,          // filesystem failure
  kLogic,       // internal misuse (e.g. sampling an empty pool)
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const { return code_; }
  // Message without the category prefix.
  const std::string& message() const { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

// Raised after the oracle peer failed on every allowed attempt.
class TransportError : public Error {
 public:
  TransportError(const std::string& message, int attempts)
      : Error(ErrorCode::kTransport,
              message + " (after " + std::to_string(attempts) + " attempts)"),
        attempts_(attempts) {}

  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig: return "configuration error";
    case ErrorCode::kInput: return "input error";
    case ErrorCode::kTransport: return "transport error";
    case ErrorCode::kData: return "data error";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kCorruption: return "corruption error";
    case ErrorCode::kIo: return "I/O error";
    case ErrorCode::kLogic: return "logic error";
  }
  return "error";
}

}  // namespace codofuzz

#endif  // CODOFUZZ_ERROR_H_
