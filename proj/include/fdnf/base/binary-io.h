// include/fdnf/base/binary-io.h

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

#ifndef FDNF_BASE_BINARY_IO_H_
#define FDNF_BASE_BINARY_IO_H_

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace fdnf {

// Explicit little-endian encoding, independent of host byte order.

void WriteU8(std::ostream &os, std::uint8_t v);
void WriteU32(std::ostream &os, std::uint32_t v);
void WriteU64(std::ostream &os, std::uint64_t v);
void WriteI32(std::ostream &os, std::int32_t v);
void WriteF64(std::ostream &os, double v);
void WriteF64Array(std::ostream &os, std::span<const double> v);
/// u32 length followed by raw bytes.
void WriteString(std::ostream &os, const std::string &s);

// Readers throw FormatError on truncated input.
std::uint8_t ReadU8(std::istream &is);
std::uint32_t ReadU32(std::istream &is);
std::uint64_t ReadU64(std::istream &is);
std::int32_t ReadI32(std::istream &is);
double ReadF64(std::istream &is);
void ReadF64Array(std::istream &is, std::span<double> out);
std::string ReadString(std::istream &is, std::uint32_t max_len = 1u << 20);

}  // namespace fdnf

#endif  // FDNF_BASE_BINARY_IO_H_
