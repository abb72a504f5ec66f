// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#include "dggen/config_file.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dggen {
namespace {

TEST(KeyValueConfigTest, TypedGettersParseTheirValues) {
  const KeyValueConfig kv = KeyValueConfig::from_string(
      "name = run_a\n"
      "epochs = 50\n"
      "steps = 4000000000\n"
      "seed = 18446744073709551615\n"
      "lr = 1e-4\n"
      "noisy = true\n"
      "quiet = 0\n");

  EXPECT_TRUE(kv.has("name"));
  EXPECT_FALSE(kv.has("missing"));
  EXPECT_EQ(kv.get_string("name", ""), "run_a");
  EXPECT_EQ(kv.get_int("epochs", -1), 50);
  EXPECT_EQ(kv.get_int64("steps", -1), 4000000000LL);
  EXPECT_EQ(kv.get_uint64("seed", 0), 18446744073709551615ull);
  EXPECT_DOUBLE_EQ(kv.get_double("lr", 0.0), 1e-4);
  EXPECT_TRUE(kv.get_bool("noisy", false));
  EXPECT_FALSE(kv.get_bool("quiet", true));
}

TEST(KeyValueConfigTest, MissingKeysFallBack) {
  const KeyValueConfig kv = KeyValueConfig::from_string("a = 1\n");
  EXPECT_EQ(kv.get_string("x", "dflt"), "dflt");
  EXPECT_EQ(kv.get_int("x", 7), 7);
  EXPECT_EQ(kv.get_int64("x", -9), -9);
  EXPECT_EQ(kv.get_uint64("x", 11u), 11u);
  EXPECT_DOUBLE_EQ(kv.get_double("x", 2.5), 2.5);
  EXPECT_TRUE(kv.get_bool("x", true));
}

TEST(KeyValueConfigTest, UnusedReportsUntouchedKeysSorted) {
  const KeyValueConfig kv = KeyValueConfig::from_string(
      "zeta = 1\n"
      "alpha = 2\n"
      "mid = 3\n");
  EXPECT_EQ(kv.unused(), (std::vector<std::string>{"alpha", "mid", "zeta"}));

  kv.get_int("mid", 0);
  EXPECT_EQ(kv.unused(), (std::vector<std::string>{"alpha", "zeta"}));

  // Fallback reads still mark the key as consumed.
  kv.get_string("alpha", "");
  kv.get_string("zeta", "");
  EXPECT_TRUE(kv.unused().empty());
}

TEST(KeyValueConfigTest, CommentsAndWhitespaceAreIgnored) {
  const KeyValueConfig kv = KeyValueConfig::from_string(
      "# full-line comment\n"
      "\n"
      "   \t  \n"
      "  a   =  1  # trailing comment\n"
      "b=2#no spaces at all\n"
      "c = with internal spaces \r\n");
  EXPECT_EQ(kv.get_int("a", -1), 1);
  EXPECT_EQ(kv.get_int("b", -1), 2);
  EXPECT_EQ(kv.get_string("c", ""), "with internal spaces");
}

TEST(KeyValueConfigTest, MalformedTextThrowsWithLineNumbers) {
  try {
    KeyValueConfig::from_string("a = 1\nbroken line\n");
    FAIL() << "expected invalid_argument";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }

  EXPECT_THROW(KeyValueConfig::from_string(" = 1\n"), std::invalid_argument);
  EXPECT_THROW(KeyValueConfig::from_string("a = 1\na = 2\n"),
               std::invalid_argument);
}

TEST(KeyValueConfigTest, BadTypedValuesThrow) {
  const KeyValueConfig kv = KeyValueConfig::from_string(
      "i = hello\n"
      "partial = 12abc\n"
      "d = 1.2.3\n"
      "b = maybe\n"
      "neg = -4\n");
  EXPECT_THROW(kv.get_int("i", 0), std::invalid_argument);
  EXPECT_THROW(kv.get_int("partial", 0), std::invalid_argument);
  EXPECT_THROW(kv.get_double("d", 0.0), std::invalid_argument);
  EXPECT_THROW(kv.get_bool("b", false), std::invalid_argument);
  EXPECT_THROW(kv.get_uint64("neg", 0), std::invalid_argument);
}

TEST(KeyValueConfigTest, LoadReadsFilesAndRejectsMissingOnes) {
  const std::string path = testing::TempDir() + "kv_roundtrip.cfg";
  {
    std::ofstream os(path);
    os << "# run settings\n"
       << "train.epochs = 3\n"
       << "train.lr = 0.5\n";
  }
  const KeyValueConfig kv = KeyValueConfig::load(path);
  EXPECT_EQ(kv.get_int("train.epochs", -1), 3);
  EXPECT_DOUBLE_EQ(kv.get_double("train.lr", 0.0), 0.5);

  EXPECT_THROW(KeyValueConfig::load(testing::TempDir() + "no_such_file.cfg"),
               std::runtime_error);
}

}  // namespace
}  // namespace dggen
