#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wzk {

// Base of every error this library throws on a contract violation.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EncodingMismatch : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// An exact computation would need more coin assignments than allowed.
class BudgetError : public Error {
 public:
  using Error::Error;
};

// A probability or threshold is not representable on its declared grid.
class GridError : public Error {
 public:
  using Error::Error;
};

// A message does not match the protocol's declared length schedule.
class ScheduleError : public Error {
 public:
  using Error::Error;
};

class RelationError : public Error {
 public:
  using Error::Error;
};

class ContractViolation : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace wzk
