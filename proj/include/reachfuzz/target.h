// Copyright 2026 The Reachfuzz Authors.
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

// A fuzz target ready to run: parsed, instrumented and linked.

#ifndef REACHFUZZ_TARGET_H_
#define REACHFUZZ_TARGET_H_

#include <filesystem>
#include <string>
#include <vector>

#include "reachfuzz/cfg_dump.h"
#include "reachfuzz/config.h"
#include "reachfuzz/instrumented_program.h"
#include "reachfuzz/ir.h"
#include "reachfuzz/program.h"

namespace reachfuzz {

struct Target {
  std::string name;
  std::vector<IrModule> modules;
  CfgDump dump;
  InstrumentedProgram instrumentation;
  Program program;
  std::vector<std::vector<uint8_t>> seeds;
  // Campaign settings specific to this target.
  ConfigMap settings;
};

// Instruments `modules` in order into a fresh dump and links them.
Target BuildTarget(std::string name, std::vector<IrModule> modules);

// A suite directory holds one target per `<name>.mir` file, with optional
// `<name>.conf` settings and a `<name>.seeds/` directory of seed inputs.
// Targets are returned sorted by name.
std::vector<Target> LoadSuite(const std::filesystem::path &dir);

}  // namespace reachfuzz

#endif  // REACHFUZZ_TARGET_H_
