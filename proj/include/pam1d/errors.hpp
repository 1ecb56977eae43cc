#pragma once

#include <stdexcept>
#include <string>

namespace pam1d {

/// Invalid parameters, malformed input files, violated preconditions.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Quadrature, eigensolver or optimizer failed to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pam1d
