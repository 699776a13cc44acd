#pragma once

#include <stdexcept>
#include <string>

namespace wasserstat {

/// Base class for all library errors. `name()` is the stable error
/// identifier reported by the CLI on numerical failure (exit code 2).
class Error : public std::runtime_error {
 public:
  Error(std::string name, const std::string& what)
      : std::runtime_error(what), name_(std::move(name)) {}

  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what) : Error("InvalidInput", what) {}
};

class SingularMatrix : public Error {
 public:
  SingularMatrix(const std::string& what, double condition_number)
      : Error("SingularMatrix", what), condition_number_(condition_number) {}

  double condition_number() const { return condition_number_; }

 private:
  double condition_number_;
};

class OutsideSupport : public Error {
 public:
  explicit OutsideSupport(const std::string& what) : Error("OutsideSupport", what) {}
};

class UnsupportedShape : public Error {
 public:
  explicit UnsupportedShape(const std::string& what) : Error("UnsupportedShape", what) {}
};

class LineSearchFailure : public Error {
 public:
  explicit LineSearchFailure(const std::string& what) : Error("LineSearchFailure", what) {}
};

class DegenerateEstimate : public Error {
 public:
  explicit DegenerateEstimate(const std::string& what) : Error("DegenerateEstimate", what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : Error("ParseError", what), row_(row), column_(column) {}

  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

}  // namespace wasserstat
