#pragma once

#include <stdexcept>
#include <string>

namespace bhpair {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration; raised before any computation starts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// |g| > omega in the linear model: the quadratic Hamiltonian has no vacuum.
class StabilityError : public Error {
 public:
  using Error::Error;
};

/// Resonant denominator in the perturbative amplitudes.
class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, double resonant_mu)
      : Error(what), resonant_mu_(resonant_mu) {}
  double resonant_mu() const noexcept { return resonant_mu_; }

 private:
  double resonant_mu_;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace bhpair
