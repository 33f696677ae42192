// Copyright 2026 The xlir Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef XLIR_ERROR_H_
#define XLIR_ERROR_H_

#include <stdexcept>
#include <string>

namespace xlir {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed on-disk input. line() is 1-based, 0 when not line-oriented.
class FormatError : public Error {
 public:
  FormatError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what),
        file_(file),
        line_(line) {}

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

// Cosine of a zero-norm vector with epsilon = 0.
class SingularityError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or gradient, or a violated gradient bound.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace xlir

#endif  // XLIR_ERROR_H_
