#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kgcoop {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text. line() is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Bad configuration or command-line usage (missing files, invalid values).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace kgcoop
