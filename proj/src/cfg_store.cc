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

#include "reachfuzz/cfg_store.h"

#include <fcntl.h>
#include <signal.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include "reachfuzz/error.h"

namespace reachfuzz {
namespace {

namespace fs = std::filesystem;

fs::path LockPathFor(const fs::path &dump_path) {
  fs::path lock = dump_path;
  lock += ".lock";
  return lock;
}

std::string NewToken() {
  std::random_device rd;
  std::ostringstream out;
  out << std::hex << rd() << rd() << rd() << rd();
  return out.str();
}

// Returns false when the file could not be read (e.g. it vanished).
bool ReadSmallFile(const fs::path &path, std::string &out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  out.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  return true;
}

bool WriteAll(int fd, const void *data, size_t size) {
  const auto *p = static_cast<const char *>(data);
  while (size > 0) {
    ssize_t n = ::write(fd, p, size);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    p += n;
    size -= static_cast<size_t>(n);
  }
  return true;
}

bool HolderIsDead(const std::string &contents) {
  std::istringstream in(contents);
  long pid = 0;
  if (!(in >> pid) || pid <= 0) return false;
  return ::kill(static_cast<pid_t>(pid), 0) != 0 && errno == ESRCH;
}

bool OlderThan(const fs::path &path, std::chrono::milliseconds age) {
  struct stat st;
  if (::stat(path.c_str(), &st) != 0) return false;
  auto mtime = std::chrono::system_clock::time_point(
      std::chrono::seconds(st.st_mtim.tv_sec) + std::chrono::nanoseconds(st.st_mtim.tv_nsec));
  return std::chrono::system_clock::now() - mtime > age;
}

// Moves a stale lock aside. If the lock changed between inspection and the
// rename (another process took it over first), the moved file is put back
// when the slot is still free.
void BreakStaleLock(const fs::path &lock, const std::string &observed) {
  fs::path aside = lock;
  aside += ".stale." + NewToken();
  if (::rename(lock.c_str(), aside.c_str()) != 0) return;
  std::string moved;
  if (ReadSmallFile(aside, moved) && moved != observed) {
    if (::link(aside.c_str(), lock.c_str()) != 0) {
      // Slot already re-taken; the moved lock's owner will see its token
      // gone and its release becomes a no-op.
    }
  }
  ::unlink(aside.c_str());
}

}  // namespace

LockGuard::LockGuard(LockGuard &&other) noexcept
    : lock_path_(std::move(other.lock_path_)), token_(std::move(other.token_)) {
  other.lock_path_.clear();
}

LockGuard &LockGuard::operator=(LockGuard &&other) noexcept {
  if (this != &other) {
    Release();
    lock_path_ = std::move(other.lock_path_);
    token_ = std::move(other.token_);
    other.lock_path_.clear();
  }
  return *this;
}

LockGuard::~LockGuard() { Release(); }

void LockGuard::Release() {
  if (lock_path_.empty()) return;
  std::string contents;
  if (ReadSmallFile(lock_path_, contents) && contents.find(token_) != std::string::npos) {
    ::unlink(lock_path_.c_str());
  }
  lock_path_.clear();
}

LockGuard LockGuard::Acquire(const fs::path &dump_path, const LockOptions &options) {
  const fs::path lock = LockPathFor(dump_path);
  const std::string token = NewToken();
  const std::string contents = std::to_string(::getpid()) + " " + token + "\n";
  const auto deadline = std::chrono::steady_clock::now() + options.timeout;
  while (true) {
    int fd = ::open(lock.c_str(), O_CREAT | O_EXCL | O_WRONLY | O_CLOEXEC, 0644);
    if (fd >= 0) {
      bool ok = WriteAll(fd, contents.data(), contents.size());
      ::close(fd);
      if (!ok) {
        ::unlink(lock.c_str());
        throw Error("cannot write lock file " + lock.string());
      }
      return LockGuard(lock, token);
    }
    if (errno != EEXIST) {
      throw Error("cannot create lock file " + lock.string() + ": " + std::strerror(errno));
    }
    std::string holder;
    if (ReadSmallFile(lock, holder)) {
      // An empty file is a holder caught between open() and write(); only
      // age can make it stale.
      bool stale = (!holder.empty() && HolderIsDead(holder)) || OlderThan(lock, options.stale_after);
      if (stale) {
        BreakStaleLock(lock, holder);
        continue;
      }
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      throw LockTimeoutError("timed out waiting for lock " + lock.string());
    }
    std::this_thread::sleep_for(options.poll_interval);
  }
}

CfgDump ReadCfgDump(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open CFG dump " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CfgDump dump = DeserializeCfgDump(bytes);
  ValidateCfgDump(dump);
  return dump;
}

FetchResult Fetch(const fs::path &path, const LockOptions &options) {
  FetchResult result;
  result.guard = LockGuard::Acquire(path, options);
  std::error_code ec;
  if (fs::exists(path, ec)) result.dump = ReadCfgDump(path);
  return result;
}

void Update(const fs::path &path, const CfgDump &dump, LockGuard guard) {
  if (!guard.held() || guard.lock_path() != LockPathFor(path)) {
    throw ContractViolation("update of " + path.string() + " without holding its lock");
  }
  const std::vector<uint8_t> bytes = SerializeCfgDump(dump);
  fs::path temp = path;
  temp += ".tmp." + std::to_string(::getpid()) + "." + NewToken();
  int fd = ::open(temp.c_str(), O_CREAT | O_EXCL | O_WRONLY | O_CLOEXEC, 0644);
  if (fd < 0) {
    throw Error("cannot create " + temp.string() + ": " + std::strerror(errno));
  }
  bool ok = WriteAll(fd, bytes.data(), bytes.size()) && ::fsync(fd) == 0;
  int saved_errno = errno;
  ok = (::close(fd) == 0) && ok;
  if (ok && ::rename(temp.c_str(), path.c_str()) != 0) {
    saved_errno = errno;
    ok = false;
  }
  if (!ok) {
    ::unlink(temp.c_str());
    throw Error("cannot write CFG dump " + path.string() + ": " + std::strerror(saved_errno));
  }
}

}  // namespace reachfuzz
