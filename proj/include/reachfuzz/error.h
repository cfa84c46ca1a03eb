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

#ifndef REACHFUZZ_ERROR_H_
#define REACHFUZZ_ERROR_H_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace reachfuzz {

// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// MiniIR source could not be parsed or failed structural validation.
class ParseError : public Error {
 public:
  ParseError(const std::string &message, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Modules could not be linked into a program (unresolved call, bad arity).
class LinkError : public Error {
 public:
  using Error::Error;
};

// A CFG dump file is malformed. `offset` is the byte at which decoding
// failed.
class CfgFormatError : public Error {
 public:
  CfgFormatError(const std::string &message, uint64_t offset);
  uint64_t offset() const { return offset_; }

 private:
  uint64_t offset_;
};

// A CFG dump violates a structural invariant (dangling uid, duplicate
// coverage index, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// The lock file could not be acquired within the timeout.
class LockTimeoutError : public Error {
 public:
  using Error::Error;
};

// A dump or instrumentation table does not belong to the module set it is
// being used with.
class ChecksumMismatchError : public Error {
 public:
  using Error::Error;
};

// Coverage feedback references an index the CFG index does not know.
class InconsistentBuildError : public Error {
 public:
  using Error::Error;
};

// A documented precondition of an API was violated by the caller.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// A configuration file or flag has an unknown key or a bad value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace reachfuzz

#endif  // REACHFUZZ_ERROR_H_
