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

#include "reachfuzz/target.h"

#include <algorithm>
#include <fstream>

#include "reachfuzz/error.h"
#include "reachfuzz/instr_pass.h"
#include "reachfuzz/ir_parser.h"

namespace reachfuzz {

Target BuildTarget(std::string name, std::vector<IrModule> modules) {
  Target target;
  target.name = std::move(name);
  for (const IrModule &module : modules) InstrumentModule(module, target.dump);
  target.instrumentation = InstrumentationFromDump(target.dump, modules);
  target.program = Program::Link(modules);
  target.modules = std::move(modules);
  return target;
}

std::vector<Target> LoadSuite(const std::filesystem::path &dir) {
  if (!std::filesystem::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<std::filesystem::path> sources;
  for (const auto &item : std::filesystem::directory_iterator(dir)) {
    if (item.path().extension() == ".mir") sources.push_back(item.path());
  }
  std::sort(sources.begin(), sources.end());
  std::vector<Target> suite;
  for (const std::filesystem::path &source : sources) {
    std::string name = source.stem().string();
    Target target = BuildTarget(name, {ParseModuleFile(source)});
    std::filesystem::path conf = dir / (name + ".conf");
    if (std::filesystem::exists(conf)) target.settings = ReadConfigFile(conf);
    std::filesystem::path seeds = dir / (name + ".seeds");
    if (std::filesystem::is_directory(seeds)) {
      std::vector<std::filesystem::path> files;
      for (const auto &item : std::filesystem::directory_iterator(seeds)) {
        if (item.is_regular_file()) files.push_back(item.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto &file : files) {
        std::ifstream in(file, std::ios::binary);
        target.seeds.emplace_back(std::istreambuf_iterator<char>(in),
                                  std::istreambuf_iterator<char>());
      }
    }
    suite.push_back(std::move(target));
  }
  if (suite.empty()) throw Error("no .mir targets in " + dir.string());
  return suite;
}

}  // namespace reachfuzz
