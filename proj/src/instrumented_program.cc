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

#include "reachfuzz/instrumented_program.h"

#include <fstream>

#include "json.hpp"
#include "reachfuzz/error.h"
#include "reachfuzz/ir.h"

namespace reachfuzz {

InstrumentedProgram::InstrumentedProgram(std::vector<ModuleInstrumentation> modules,
                                         uint64_t map_size)
    : modules_(std::move(modules)), map_size_(map_size) {
  std::vector<uint64_t> checksums;
  for (const ModuleInstrumentation &module : modules_) {
    checksums.push_back(module.checksum);
    for (int64_t index : module.coverage_index) {
      if (index >= 0 && static_cast<uint64_t>(index) >= map_size_) {
        throw ContractViolation("coverage index " + std::to_string(index) +
                                " outside map of size " + std::to_string(map_size_));
      }
      block_table_.push_back(index);
    }
  }
  checksum_ = CombineChecksums(checksums);
}

size_t InstrumentedProgram::NumInstrumented() const {
  size_t n = 0;
  for (int64_t index : block_table_) n += index >= 0;
  return n;
}

void InstrumentedProgram::Save(const std::filesystem::path &path) const {
  nlohmann::json doc;
  doc["map_size"] = map_size_;
  doc["checksum"] = checksum_;
  auto &modules = doc["modules"] = nlohmann::json::array();
  for (const ModuleInstrumentation &module : modules_) {
    modules.push_back({{"name", module.name},
                       {"checksum", module.checksum},
                       {"first_uid", module.first_uid},
                       {"coverage_index", module.coverage_index}});
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(1) << "\n";
}

InstrumentedProgram InstrumentedProgram::Load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    nlohmann::json doc = nlohmann::json::parse(in);
    std::vector<ModuleInstrumentation> modules;
    for (const auto &entry : doc.at("modules")) {
      ModuleInstrumentation module;
      module.name = entry.at("name").get<std::string>();
      module.checksum = entry.at("checksum").get<uint64_t>();
      module.first_uid = entry.at("first_uid").get<uint64_t>();
      module.coverage_index = entry.at("coverage_index").get<std::vector<int64_t>>();
      modules.push_back(std::move(module));
    }
    InstrumentedProgram program(std::move(modules), doc.at("map_size").get<uint64_t>());
    if (program.checksum() != doc.at("checksum").get<uint64_t>()) {
      throw ChecksumMismatchError(path.string() + ": sidecar checksum does not match its modules");
    }
    return program;
  } catch (const nlohmann::json::exception &e) {
    throw Error(path.string() + ": malformed instrumentation sidecar: " + e.what());
  }
}

}  // namespace reachfuzz
