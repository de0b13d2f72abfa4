#ifndef ACRE_ERRORS_HPP_
#define ACRE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace acre {

// Base class for every error raised by the library. Validation-type errors
// map to exit code 1 at the CLI, everything else to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual bool is_validation() const { return false; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  bool is_validation() const override { return true; }
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class EmptySetError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
  bool is_validation() const override { return true; }
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace acre

#endif  // ACRE_ERRORS_HPP_
