#pragma once

#include <stdexcept>
#include <string>

namespace quic {

/// Base class for every error raised by the library. `code()` is a short
/// machine-readable tag used as the CLI error prefix.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message) : Error("E_DOMAIN", message) {}
};

/// Malformed scenario text. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error("E_PARSE", std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Well-formed scenario that violates the schema. `field()` is a dotted path.
class SchemaError : public Error {
 public:
  SchemaError(std::string field, const std::string& message)
      : Error("E_SCHEMA", field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Configuration that is syntactically fine but physically inconsistent.
class PhysicsError : public Error {
 public:
  explicit PhysicsError(const std::string& message) : Error("E_PHYSICS", message) {}
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& message)
      : Error("E_IO", path + ": " + message) {}
};

/// Request exceeding the configured memory budget.
class ResourceError : public Error {
 public:
  explicit ResourceError(const std::string& message) : Error("E_RESOURCE", message) {}
};

}  // namespace quic
