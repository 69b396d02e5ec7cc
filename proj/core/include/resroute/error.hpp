#pragma once

#include <stdexcept>
#include <string>

namespace resroute {

// All library errors derive from Error so callers can catch one type at the
// CLI boundary and map it to an exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed input document. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::string field = {})
      : Error(format(what, line, field)), line_(line), field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  static std::string format(const std::string& what, std::size_t line, const std::string& field) {
    std::string out = "parse error";
    if (line > 0) out += " at line " + std::to_string(line);
    if (!field.empty()) out += " (field '" + field + "')";
    return out + ": " + what;
  }

  std::size_t line_;
  std::string field_;
};

// Well-formed input that violates a model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class NoRoute : public Error {
 public:
  using Error::Error;
};

// Internal invariant broken at runtime, e.g. a protocol handing out a
// non-adjacent next hop.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace resroute
