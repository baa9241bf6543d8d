// tests/unit/test-base.cc

// Copyright 2026  The fdnf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <limits>
#include <sstream>

#include <doctest.h>

#include "fdnf/base/binary-io.h"
#include "fdnf/base/common.h"
#include "fdnf/base/error.h"

using namespace fdnf;

TEST_CASE("fnv-1a reference values") {
  CHECK(Fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(Fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(Fnv1a64("foobar") == 0x85944171f73967e8ull);
  CHECK(HexDigest(0x1ull) == "0000000000000001");
}

TEST_CASE("number formatting round trips") {
  for (double v : {0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, -0.0,
                   std::numeric_limits<double>::denorm_min()}) {
    double back = ParseDouble(FormatDouble(v));
    CHECK(std::signbit(back) == std::signbit(v));
    CHECK(back == v);
  }
  CHECK(ParseDouble(" 2.5 ") == 2.5);
  CHECK_THROWS_AS(ParseDouble("2.5x"), FormatError);
  CHECK_THROWS_AS(ParseDouble(""), FormatError);
  CHECK(ParseInt("-42") == -42);
  CHECK_THROWS_AS(ParseInt("4.2"), FormatError);
}

TEST_CASE("string helpers") {
  auto parts = SplitString("a,,b", ',');
  REQUIRE(parts.size() == 3u);
  CHECK(parts[1].empty());
  CHECK(Trim("\t x y \n") == "x y");
  Matrix m = Matrix::Zero(2, 2);
  CHECK(AllFinite(m));
  m(1, 0) = std::nan("");
  CHECK_FALSE(AllFinite(m));
}

TEST_CASE("little-endian binary io") {
  std::stringstream ss;
  WriteU32(ss, 0x01020304u);
  std::string bytes = ss.str();
  REQUIRE(bytes.size() == 4u);
  CHECK(static_cast<unsigned char>(bytes[0]) == 0x04);
  CHECK(static_cast<unsigned char>(bytes[3]) == 0x01);

  std::stringstream rt;
  WriteU8(rt, 7);
  WriteU64(rt, 0xfedcba9876543210ull);
  WriteI32(rt, -5);
  WriteF64(rt, -1.0 / 7.0);
  WriteString(rt, "id-1");
  std::vector<double> arr = {1.5, -2.25};
  WriteF64Array(rt, arr);
  CHECK(ReadU8(rt) == 7);
  CHECK(ReadU64(rt) == 0xfedcba9876543210ull);
  CHECK(ReadI32(rt) == -5);
  CHECK(ReadF64(rt) == -1.0 / 7.0);
  CHECK(ReadString(rt) == "id-1");
  std::vector<double> back(2);
  ReadF64Array(rt, back);
  CHECK(back == arr);
  CHECK_THROWS_AS(ReadU32(rt), FormatError);
}

TEST_CASE("parallel for covers every index once") {
  for (int threads : {1, 2, 5}) {
    SetNumThreads(threads);
    std::vector<int> hits(1001, 0);
    ParallelFor(hits.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) ++hits[i];
    });
    for (int h : hits) CHECK(h == 1);
  }
  SetNumThreads(0);
  CHECK(NumThreads() >= 1);
}
