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

// Stdio front end for the fake protocol peer:
//   fake_model_server <model.json> [--die-after N] [--error-every N]
//                     [--stale-first] [--silent]
#include <unistd.h>

#include <cstdlib>
#include <iostream>
#include <string>

#include "fake_server.h"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: fake_model_server <model.json> [flags]\n";
    return 2;
  }
  codofuzz::testing::FakeServerOptions options;
  for (int i = 2; i < argc; ++i) {
    const std::string flag = argv[i];
    if (flag == "--die-after" && i + 1 < argc) {
      options.die_after = std::atoi(argv[++i]);
    } else if (flag == "--error-every" && i + 1 < argc) {
      options.error_every = std::atoi(argv[++i]);
    } else if (flag == "--stale-first") {
      options.stale_first = true;
    } else if (flag == "--silent") {
      options.silent = true;
    } else {
      std::cerr << "unknown flag " << flag << "\n";
      return 2;
    }
  }
  try {
    const auto model = codofuzz::LinearSoftmaxModel::Load(argv[1]);
    codofuzz::testing::ServeStream(STDIN_FILENO, STDOUT_FILENO, model, options);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
