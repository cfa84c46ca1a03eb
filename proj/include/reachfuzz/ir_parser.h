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

#ifndef REACHFUZZ_IR_PARSER_H_
#define REACHFUZZ_IR_PARSER_H_

#include <filesystem>
#include <string>
#include <string_view>

#include "reachfuzz/ir.h"

namespace reachfuzz {

// Parses MiniIR source text into a validated module. Throws ParseError with
// the offending line and column on syntax errors, undefined or duplicate
// labels, duplicate function names and blocks without a terminator.
IrModule ParseModule(std::string_view source, std::string name = "<module>");

// Reads and parses a .mir file. The module is named after the file name
// (without directories), which is how CFG dumps refer to it.
IrModule ParseModuleFile(const std::filesystem::path &path);

// Renders a module back to MiniIR text. Parsing the output yields a module
// with the same structure.
std::string PrintModule(const IrModule &module);

}  // namespace reachfuzz

#endif  // REACHFUZZ_IR_PARSER_H_
