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

// Read-modify-write access to a CFG dump file shared by concurrent
// instrumentation runs. A sibling "<path>.lock" file acts as a cross-process
// mutex: it is created exclusively and holds the owner's pid and a random
// token. A lock whose owner process no longer exists, or whose file is older
// than LockOptions::stale_after, is taken over.

#ifndef REACHFUZZ_CFG_STORE_H_
#define REACHFUZZ_CFG_STORE_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>

#include "reachfuzz/cfg_dump.h"

namespace reachfuzz {

struct LockOptions {
  std::chrono::milliseconds timeout{30'000};
  std::chrono::milliseconds poll_interval{5};
  std::chrono::milliseconds stale_after{120'000};
};

// Ownership of a dump's lock file. Move-only; releases on destruction.
class LockGuard {
 public:
  LockGuard() = default;
  LockGuard(LockGuard &&other) noexcept;
  LockGuard &operator=(LockGuard &&other) noexcept;
  LockGuard(const LockGuard &) = delete;
  LockGuard &operator=(const LockGuard &) = delete;
  ~LockGuard();

  // Blocks until the lock for `dump_path` is held or options.timeout
  // elapses (LockTimeoutError).
  static LockGuard Acquire(const std::filesystem::path &dump_path,
                           const LockOptions &options = {});

  bool held() const { return !lock_path_.empty(); }
  const std::filesystem::path &lock_path() const { return lock_path_; }
  // Removes the lock file if it still carries this guard's token.
  void Release();

 private:
  LockGuard(std::filesystem::path lock_path, std::string token)
      : lock_path_(std::move(lock_path)), token_(std::move(token)) {}

  std::filesystem::path lock_path_;
  std::string token_;
};

struct FetchResult {
  CfgDump dump;
  LockGuard guard;
};

// Locks `path` and reads it. An absent file yields an empty dump with zero
// counters. A malformed file throws CfgFormatError or ValidationError (the
// lock is released).
FetchResult Fetch(const std::filesystem::path &path, const LockOptions &options = {});

// Atomically replaces `path` with `dump` (temp file, fsync, rename) and
// releases `guard`, which must come from Fetch() on the same path
// (ContractViolation otherwise). On I/O failure the temp file is removed, the
// lock is released and Error is thrown.
void Update(const std::filesystem::path &path, const CfgDump &dump, LockGuard guard);

// Unlocked read for consumers that only load a finished dump.
CfgDump ReadCfgDump(const std::filesystem::path &path);

}  // namespace reachfuzz

#endif  // REACHFUZZ_CFG_STORE_H_
