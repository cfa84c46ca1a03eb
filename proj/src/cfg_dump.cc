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

#include "reachfuzz/cfg_dump.h"

#include <cstring>
#include <set>
#include <unordered_set>

#include "reachfuzz/error.h"

namespace reachfuzz {
namespace {

class Writer {
 public:
  void U64(uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void U32(uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void Str(const std::string &s) {
    U32(static_cast<uint32_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void Raw(const void *data, size_t n) {
    const auto *p = static_cast<const uint8_t *>(data);
    out_.insert(out_.end(), p, p + n);
  }
  std::vector<uint8_t> Take() { return std::move(out_); }

 private:
  std::vector<uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  uint64_t U64(const char *what) {
    Need(8, what);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  uint32_t U32(const char *what) {
    Need(4, what);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::string Str(const char *what) {
    uint32_t n = U32(what);
    Need(n, what);
    std::string s(reinterpret_cast<const char *>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  // Reads an element count and rejects counts that cannot possibly fit in
  // the remaining bytes given each element takes at least `min_size`.
  uint64_t Count(const char *what, uint64_t min_size) {
    uint64_t at = pos_;
    uint64_t n = U64(what);
    if (min_size > 0 && n > Remaining() / min_size) {
      throw CfgFormatError(std::string(what) + " count " + std::to_string(n) +
                               " exceeds remaining data",
                           at);
    }
    return n;
  }
  void Need(uint64_t n, const char *what) {
    if (Remaining() < n) {
      throw CfgFormatError(std::string("truncated while reading ") + what, pos_);
    }
  }
  void Skip(uint64_t n) { pos_ += n; }
  uint64_t Remaining() const { return bytes_.size() - pos_; }
  uint64_t pos() const { return pos_; }

 private:
  std::span<const uint8_t> bytes_;
  uint64_t pos_ = 0;
};

}  // namespace

const ModuleRecord *CfgDump::FindModule(const std::string &name) const {
  for (const ModuleRecord &record : modules) {
    if (record.name == name) return &record;
  }
  return nullptr;
}

std::vector<uint8_t> SerializeCfgDump(const CfgDump &dump) {
  Writer w;
  w.Raw(kCfgMagic, sizeof(kCfgMagic));
  w.U64(dump.format_version);
  w.U64(dump.latest_coverage_map_index);
  w.U64(dump.latest_block_uid);
  w.U64(dump.modules.size());
  for (const ModuleRecord &m : dump.modules) {
    w.Str(m.name);
    w.U64(m.checksum);
    w.U64(m.first_uid);
    w.U64(m.num_blocks);
    w.U64(m.first_coverage_index);
    w.U64(m.num_instrumented);
  }
  w.U64(dump.functions.size());
  for (const auto &[name, definitions] : dump.functions) {
    w.Str(name);
    w.U64(definitions.size());
    for (const FunctionDefinition &def : definitions) {
      w.U64(def.module);
      w.U64(def.blocks.size());
      for (const BasicBlockInfo &bb : def.blocks) {
        w.U64(bb.uid);
        w.U64(bb.coverage_map_index ? *bb.coverage_map_index : static_cast<uint64_t>(-1));
        w.U64(bb.called_funcs.size());
        for (const std::string &callee : bb.called_funcs) w.Str(callee);
        w.U64(bb.successor_uids.size());
        for (uint64_t succ : bb.successor_uids) w.U64(succ);
        w.U64(bb.num_indirect_calls);
      }
    }
  }
  return w.Take();
}

CfgDump DeserializeCfgDump(std::span<const uint8_t> bytes) {
  Reader body(bytes);
  body.Need(sizeof(kCfgMagic), "magic");
  if (std::memcmp(bytes.data(), kCfgMagic, sizeof(kCfgMagic)) != 0) {
    throw CfgFormatError("bad magic", 0);
  }
  body.Skip(sizeof(kCfgMagic));
  {
    CfgDump dump;
    uint64_t version_at = body.pos();
    dump.format_version = body.U64("format version");
    if (dump.format_version != kCfgFormatVersion) {
      throw CfgFormatError("unsupported format version " + std::to_string(dump.format_version),
                           version_at);
    }
    dump.latest_coverage_map_index = body.U64("coverage counter");
    dump.latest_block_uid = body.U64("uid counter");
    uint64_t num_modules = body.Count("module", 4 + 8 * 5);
    for (uint64_t i = 0; i < num_modules; ++i) {
      ModuleRecord m;
      m.name = body.Str("module name");
      m.checksum = body.U64("module checksum");
      m.first_uid = body.U64("module first uid");
      m.num_blocks = body.U64("module block count");
      m.first_coverage_index = body.U64("module first coverage index");
      m.num_instrumented = body.U64("module instrumented count");
      dump.modules.push_back(std::move(m));
    }
    uint64_t num_functions = body.Count("function", 4 + 8);
    std::string previous;
    for (uint64_t i = 0; i < num_functions; ++i) {
      uint64_t name_at = body.pos();
      std::string name = body.Str("function name");
      if (i > 0 && name <= previous) {
        throw CfgFormatError("function names not strictly ascending", name_at);
      }
      previous = name;
      uint64_t num_defs = body.Count("definition", 16);
      std::vector<FunctionDefinition> defs;
      for (uint64_t d = 0; d < num_defs; ++d) {
        FunctionDefinition def;
        def.module = body.U64("definition module");
        uint64_t num_blocks = body.Count("block", 8 * 5);
        for (uint64_t b = 0; b < num_blocks; ++b) {
          BasicBlockInfo bb;
          bb.uid = body.U64("block uid");
          uint64_t index = body.U64("coverage index");
          if (index != static_cast<uint64_t>(-1)) bb.coverage_map_index = index;
          uint64_t num_called = body.Count("called function", 4);
          for (uint64_t c = 0; c < num_called; ++c) bb.called_funcs.push_back(body.Str("callee"));
          uint64_t num_succ = body.Count("successor", 8);
          for (uint64_t s = 0; s < num_succ; ++s) bb.successor_uids.push_back(body.U64("successor"));
          bb.num_indirect_calls = body.U64("indirect call count");
          def.blocks.push_back(std::move(bb));
        }
        defs.push_back(std::move(def));
      }
      dump.functions.emplace(std::move(name), std::move(defs));
    }
    if (body.Remaining() != 0) {
      throw CfgFormatError("trailing bytes after dump", body.pos());
    }
    return dump;
  }
}

void ValidateCfgDump(const CfgDump &dump) {
  std::unordered_set<uint64_t> uids;
  std::unordered_set<uint64_t> indices;
  for (const auto &[name, definitions] : dump.functions) {
    if (definitions.empty()) throw ValidationError("function '" + name + "' has no definitions");
    for (const FunctionDefinition &def : definitions) {
      if (def.module >= dump.modules.size() && !dump.modules.empty()) {
        throw ValidationError("function '" + name + "' names unknown module " +
                              std::to_string(def.module));
      }
      if (def.blocks.empty()) throw ValidationError("function '" + name + "' has no blocks");
      std::set<uint64_t> local;
      for (size_t i = 0; i < def.blocks.size(); ++i) {
        const BasicBlockInfo &bb = def.blocks[i];
        if (bb.uid != def.blocks[0].uid + i) {
          throw ValidationError("uids of '" + name + "' are not consecutive at uid " +
                                std::to_string(bb.uid));
        }
        if (bb.uid >= dump.latest_block_uid) {
          throw ValidationError("uid " + std::to_string(bb.uid) + " not below uid counter");
        }
        if (!uids.insert(bb.uid).second) {
          throw ValidationError("duplicate uid " + std::to_string(bb.uid));
        }
        if (bb.coverage_map_index) {
          if (*bb.coverage_map_index >= dump.latest_coverage_map_index) {
            throw ValidationError("coverage index " + std::to_string(*bb.coverage_map_index) +
                                  " not below coverage counter");
          }
          if (!indices.insert(*bb.coverage_map_index).second) {
            throw ValidationError("duplicate coverage index " +
                                  std::to_string(*bb.coverage_map_index));
          }
        }
        local.insert(bb.uid);
      }
      for (const BasicBlockInfo &bb : def.blocks) {
        for (uint64_t succ : bb.successor_uids) {
          if (!local.count(succ)) {
            throw ValidationError("block " + std::to_string(bb.uid) +
                                  " has dangling successor uid " + std::to_string(succ));
          }
        }
      }
    }
  }
}

nlohmann::json CfgDumpToJson(const CfgDump &dump) {
  nlohmann::json doc;
  doc["format_version"] = dump.format_version;
  doc["latest_coverage_map_index"] = dump.latest_coverage_map_index;
  doc["latest_block_uid"] = dump.latest_block_uid;
  auto &modules = doc["modules"] = nlohmann::json::array();
  for (const ModuleRecord &m : dump.modules) {
    modules.push_back({{"name", m.name},
                       {"checksum", m.checksum},
                       {"first_uid", m.first_uid},
                       {"num_blocks", m.num_blocks},
                       {"first_coverage_index", m.first_coverage_index},
                       {"num_instrumented", m.num_instrumented}});
  }
  auto &functions = doc["functions"] = nlohmann::json::object();
  for (const auto &[name, definitions] : dump.functions) {
    auto &defs = functions[name] = nlohmann::json::array();
    for (const FunctionDefinition &def : definitions) {
      nlohmann::json blocks = nlohmann::json::array();
      for (const BasicBlockInfo &bb : def.blocks) {
        blocks.push_back({{"uid", bb.uid},
                          {"coverage_map_index",
                           bb.coverage_map_index ? nlohmann::json(*bb.coverage_map_index)
                                                 : nlohmann::json(-1)},
                          {"called_funcs", bb.called_funcs},
                          {"successor_uids", bb.successor_uids},
                          {"num_indirect_calls", bb.num_indirect_calls}});
      }
      defs.push_back({{"module", def.module}, {"blocks", std::move(blocks)}});
    }
  }
  return doc;
}

}  // namespace reachfuzz
