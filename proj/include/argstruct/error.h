/* Copyright 2026 The ArgStruct Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef ARGSTRUCT_ERROR_H_
#define ARGSTRUCT_ERROR_H_

#include <stdexcept>
#include <string>

namespace argstruct {

// Base class of every error raised by the library. The CLI maps it to exit
// code 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &message) : std::runtime_error(message) {}
};

// Malformed corpus input. `line` is 1-based; 0 when no line applies.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string &message)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message
                       : message),
        line_(line) {}
  int line() const { return line_; }

  // The same error with `file` prefixed to the message.
  ParseError InFile(const std::string &file) const { return ParseError(file, line_, what()); }

 private:
  ParseError(const std::string &file, int line, const char *message)
      : Error(file + ": " + message), line_(line) {}

  int line_;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Model file could not be read or does not match the expected
// configuration / vocabulary.
class ModelFormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace argstruct

#endif  // ARGSTRUCT_ERROR_H_
