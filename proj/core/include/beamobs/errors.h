#pragma once

#include <stdexcept>
#include <string>

namespace beamobs {

/// Invalid or unknown configuration input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure could not produce a trustworthy result
/// (factorisation failure, divergence, infeasible optimisation).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace beamobs
