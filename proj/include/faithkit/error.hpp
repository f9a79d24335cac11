#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace faithkit {

// Root of every error the library throws. The CLI maps ArgumentError to a
// usage failure and everything else to a data/contract failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed an out-of-range or inconsistent argument.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Input data violated a schema or an invariant.
class DataError : public Error {
 public:
  using Error::Error;
};

// Malformed record in a line-oriented file.
class ParseError : public DataError {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : DataError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A model backend broke the contract of the interface it implements.
class ContractError : public Error {
 public:
  ContractError(const std::string& interface_name, const std::string& what)
      : Error(interface_name + " contract violated: " + what), interface_(interface_name) {}

  const std::string& interface_name() const { return interface_; }

 private:
  std::string interface_;
};

// Correlation requested on a series with zero rank variance.
class UndefinedCorrelation : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class TrainingDiverged : public Error {
 public:
  TrainingDiverged(std::size_t step, const std::string& what)
      : Error("training diverged at step " + std::to_string(step) + ": " + what), step_(step) {}

  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

}  // namespace faithkit
