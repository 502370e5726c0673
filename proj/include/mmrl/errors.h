// Copyright 2026 The mmrl Authors.
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

#ifndef MMRL_ERRORS_H_
#define MMRL_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mmrl {

// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A configuration value is missing, malformed, or out of range. `field` holds
// the dotted path of the offending entry when it is known.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Input data violates a structural invariant (duplicate ids, unassigned
// shards, cache entries for unknown samples, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A trace line could not be parsed. Line numbers are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Exhaustive search refused because the instance is too large.
class SizeError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

}  // namespace mmrl

#endif  // MMRL_ERRORS_H_
