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

// Minimal in-tree peer for the oracle wire protocol, serving a
// LinearSoftmaxModel. Used to exercise ProtocolClient without the external
// model server. Fault-injection knobs make the client's retry and id
// correlation paths observable.
#ifndef CODOFUZZ_TESTS_FAKE_SERVER_H_
#define CODOFUZZ_TESTS_FAKE_SERVER_H_

#include <atomic>
#include <string>

#include "codofuzz/linear_model.h"

namespace codofuzz::testing {

struct FakeServerOptions {
  // Exit (closing the stream) upon receiving this many predict requests;
  // 0 disables.
  int die_after = 0;
  // Answer every Nth predict with {"op":"error"}; 0 disables.
  int error_every = 0;
  // Before each result, emit a stale result for an older id.
  bool stale_first = false;
  // Never answer predicts (forces client timeouts).
  bool silent = false;
};

// Serves line-delimited requests from in_fd, writing responses to out_fd,
// until EOF. Returns the number of predict requests answered.
int ServeStream(int in_fd, int out_fd, const LinearSoftmaxModel& model,
                const FakeServerOptions& options,
                std::atomic<int>* requests_seen = nullptr);

}  // namespace codofuzz::testing

#endif  // CODOFUZZ_TESTS_FAKE_SERVER_H_
