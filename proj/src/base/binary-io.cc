// src/base/binary-io.cc

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

#include "fdnf/base/binary-io.h"

#include <bit>

#include "fdnf/base/error.h"

namespace fdnf {

namespace {

void WriteLe(std::ostream &os, std::uint64_t v, int nbytes) {
  char buf[8];
  for (int i = 0; i < nbytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(buf, nbytes);
  if (!os) throw IoError("write failed");
}

std::uint64_t ReadLe(std::istream &is, int nbytes) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char *>(buf), nbytes);
  if (is.gcount() != nbytes) throw FormatError("unexpected end of binary data");
  std::uint64_t v = 0;
  for (int i = 0; i < nbytes; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void WriteU8(std::ostream &os, std::uint8_t v) { WriteLe(os, v, 1); }
void WriteU32(std::ostream &os, std::uint32_t v) { WriteLe(os, v, 4); }
void WriteU64(std::ostream &os, std::uint64_t v) { WriteLe(os, v, 8); }
void WriteI32(std::ostream &os, std::int32_t v) {
  WriteLe(os, static_cast<std::uint32_t>(v), 4);
}
void WriteF64(std::ostream &os, double v) {
  WriteLe(os, std::bit_cast<std::uint64_t>(v), 8);
}

void WriteF64Array(std::ostream &os, std::span<const double> v) {
  for (double d : v) WriteF64(os, d);
}

void WriteString(std::ostream &os, const std::string &s) {
  WriteU32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!os) throw IoError("write failed");
}

std::uint8_t ReadU8(std::istream &is) { return static_cast<std::uint8_t>(ReadLe(is, 1)); }
std::uint32_t ReadU32(std::istream &is) { return static_cast<std::uint32_t>(ReadLe(is, 4)); }
std::uint64_t ReadU64(std::istream &is) { return ReadLe(is, 8); }
std::int32_t ReadI32(std::istream &is) {
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(ReadLe(is, 4)));
}
double ReadF64(std::istream &is) { return std::bit_cast<double>(ReadLe(is, 8)); }

void ReadF64Array(std::istream &is, std::span<double> out) {
  for (double &d : out) d = ReadF64(is);
}

std::string ReadString(std::istream &is, std::uint32_t max_len) {
  std::uint32_t n = ReadU32(is);
  if (n > max_len) throw FormatError("string length " + std::to_string(n) + " too large");
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (static_cast<std::uint32_t>(is.gcount()) != n)
    throw FormatError("unexpected end of binary data");
  return s;
}

}  // namespace fdnf
