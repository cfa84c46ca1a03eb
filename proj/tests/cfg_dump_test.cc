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

#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "reachfuzz/error.h"
#include "support/test_support.h"

namespace reachfuzz {
namespace {

using ::reachfuzz::testing::RandomCfgDump;

CfgDump SmallDump() {
  CfgDump dump;
  dump.latest_block_uid = 2;
  dump.latest_coverage_map_index = 1;
  dump.modules.push_back({"m.mir", 0xabcdef, 0, 2, 0, 1});
  FunctionDefinition def;
  def.blocks.push_back({0, 0, {"g"}, {1}, 0});
  def.blocks.push_back({1, std::nullopt, {}, {}, 2});
  dump.functions["f"].push_back(def);
  return dump;
}

TEST(CfgDumpTest, ExactByteLayout) {
  std::vector<uint8_t> bytes = SerializeCfgDump(SmallDump());
  std::vector<uint8_t> expected;
  auto u64 = [&](uint64_t v) {
    for (int i = 0; i < 8; ++i) expected.push_back(static_cast<uint8_t>(v >> (8 * i)));
  };
  auto str = [&](const std::string &s) {
    for (int i = 0; i < 4; ++i) expected.push_back(static_cast<uint8_t>(s.size() >> (8 * i)));
    expected.insert(expected.end(), s.begin(), s.end());
  };
  for (char c : {'P', 'F', 'C', 'F', 'G', '\0', '\0', '\1'}) expected.push_back(c);
  u64(1);  // version
  u64(1);  // latest coverage index
  u64(2);  // latest uid
  u64(1);
  str("m.mir");
  u64(0xabcdef);
  u64(0);
  u64(2);
  u64(0);
  u64(1);
  u64(1);  // functions
  str("f");
  u64(1);  // definitions
  u64(0);  // module ordinal
  u64(2);  // blocks
  u64(0);
  u64(0);
  u64(1);
  str("g");
  u64(1);
  u64(1);
  u64(0);
  u64(1);
  u64(~0ULL);  // no coverage index
  u64(0);
  u64(0);
  u64(2);
  EXPECT_EQ(bytes, expected);
}

TEST(CfgDumpTest, RoundTripsRandomDumps) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    CfgDump dump = RandomCfgDump(rng);
    ValidateCfgDump(dump);
    std::vector<uint8_t> bytes = SerializeCfgDump(dump);
    CfgDump back = DeserializeCfgDump(bytes);
    ASSERT_EQ(back, dump);
    ASSERT_EQ(SerializeCfgDump(back), bytes);
  }
}

TEST(CfgDumpTest, EveryTruncationIsAnError) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 30; ++i) {
    std::vector<uint8_t> bytes = SerializeCfgDump(RandomCfgDump(rng));
    for (size_t len = 0; len < bytes.size(); ++len) {
      try {
        DeserializeCfgDump(std::span<const uint8_t>(bytes.data(), len));
        FAIL() << "truncation to " << len << " bytes accepted";
      } catch (const CfgFormatError &e) {
        EXPECT_LE(e.offset(), len);
        EXPECT_NE(std::string(e.what()).find("byte " + std::to_string(e.offset())),
                  std::string::npos);
      }
    }
  }
}

TEST(CfgDumpTest, RejectsBadHeaderAndTrailingBytes) {
  std::vector<uint8_t> bytes = SerializeCfgDump(SmallDump());
  std::vector<uint8_t> bad_magic = bytes;
  bad_magic[2] = 'X';
  EXPECT_THROW(DeserializeCfgDump(bad_magic), CfgFormatError);

  std::vector<uint8_t> bad_version = bytes;
  bad_version[8] = 2;
  try {
    DeserializeCfgDump(bad_version);
    FAIL();
  } catch (const CfgFormatError &e) {
    EXPECT_EQ(e.offset(), 8u);
  }

  std::vector<uint8_t> trailing = bytes;
  trailing.push_back(0);
  try {
    DeserializeCfgDump(trailing);
    FAIL();
  } catch (const CfgFormatError &e) {
    EXPECT_EQ(e.offset(), bytes.size());
  }
}

TEST(CfgDumpTest, HugeCountsFailWithoutAllocating) {
  std::vector<uint8_t> bytes = SerializeCfgDump(CfgDump{});
  // Module count sits right after the three header integers.
  std::memset(bytes.data() + 32, 0xff, 8);
  EXPECT_THROW(DeserializeCfgDump(bytes), CfgFormatError);
}

TEST(CfgDumpTest, ValidationCatchesBrokenInvariants) {
  CfgDump dangling = SmallDump();
  dangling.functions["f"][0].blocks[1].successor_uids.push_back(7);
  EXPECT_THROW(ValidateCfgDump(dangling), ValidationError);

  CfgDump duplicate_index = SmallDump();
  duplicate_index.latest_coverage_map_index = 2;
  duplicate_index.functions["f"][0].blocks[1].coverage_map_index = 0;
  EXPECT_THROW(ValidateCfgDump(duplicate_index), ValidationError);

  CfgDump index_too_big = SmallDump();
  index_too_big.latest_coverage_map_index = 0;
  EXPECT_THROW(ValidateCfgDump(index_too_big), ValidationError);

  CfgDump gap = SmallDump();
  gap.latest_block_uid = 3;
  gap.functions["f"][0].blocks[1].uid = 2;
  EXPECT_THROW(ValidateCfgDump(gap), ValidationError);

  CfgDump uid_reused = SmallDump();
  uid_reused.functions["g"].push_back(uid_reused.functions["f"][0]);
  EXPECT_THROW(ValidateCfgDump(uid_reused), ValidationError);

  CfgDump bad_module = SmallDump();
  bad_module.functions["f"][0].module = 4;
  EXPECT_THROW(ValidateCfgDump(bad_module), ValidationError);

  ValidateCfgDump(SmallDump());
}

TEST(CfgDumpTest, JsonMirrorsTheDump) {
  nlohmann::json doc = CfgDumpToJson(SmallDump());
  EXPECT_EQ(doc["latest_block_uid"], 2);
  EXPECT_EQ(doc["functions"]["f"][0]["blocks"][1]["coverage_map_index"], -1);
  EXPECT_EQ(doc["functions"]["f"][0]["blocks"][0]["called_funcs"][0], "g");
  EXPECT_EQ(doc["modules"][0]["name"], "m.mir");
}

}  // namespace
}  // namespace reachfuzz
