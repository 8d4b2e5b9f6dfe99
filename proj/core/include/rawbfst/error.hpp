#pragma once

#include <stdexcept>
#include <string>

namespace rawbfst {

/// Invalid input parameters or violated preconditions of a parameter rule.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Non-finite data, failed quadrature, or another numerical breakdown.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rawbfst
