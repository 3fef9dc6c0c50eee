#pragma once

#include <stdexcept>
#include <string>

namespace hetflux {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A monotone root solve could not bracket or converge. Usually means the
/// flux model violates coercivity or convexity in the searched window.
class RootFailure : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class CflViolation : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Bad configuration value. `key()` carries the dotted config key, e.g. "mesh.dx".
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace hetflux
