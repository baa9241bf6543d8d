// include/fdnf/base/error.h

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

#ifndef FDNF_BASE_ERROR_H_
#define FDNF_BASE_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fdnf {

/// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration or arguments, detected before any work is done.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Non-finite or singular values. `layer()` is the flow layer index that
/// produced them, or -1 when the failure is not tied to a layer.
class NumericalError : public Error {
 public:
  NumericalError(const std::string &what, int layer = -1)
      : Error(what), layer_(layer) {}
  int layer() const { return layer_; }

 private:
  int layer_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content.
class FormatError : public Error {
 public:
  using Error::Error;
};

class HeaderError : public FormatError {
 public:
  using FormatError::FormatError;
};

class RaggedRowError : public FormatError {
 public:
  RaggedRowError(const std::string &what, std::size_t row)
      : FormatError(what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class LabelRangeError : public FormatError {
 public:
  LabelRangeError(const std::string &what, std::size_t row)
      : FormatError(what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

}  // namespace fdnf

#endif  // FDNF_BASE_ERROR_H_
