/*
 * Copyright 2026 The fedalc Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDALC_ERROR_HPP_
#define FEDALC_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fedalc {

// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes disagree (vector lengths, matrix dimensions, σ size vs C).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A vector that must be normalized has zero norm, or an input has no content.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// An index, count or scalar argument lies outside its admissible range.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Malformed text input. `line()` is 1-based; 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace fedalc

#endif  // FEDALC_ERROR_HPP_
