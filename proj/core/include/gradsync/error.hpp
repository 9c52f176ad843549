#pragma once

#include <stdexcept>
#include <string>

namespace gradsync {

// Every error message is prefixed with the module that raised it, e.g.
// "flow: divergence guard exceeded at t=3.2".
class Error : public std::runtime_error {
 public:
  Error(const std::string& module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(module) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

// |x| exceeded the divergence guard during explicit stepping.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Polar integration stepped below the r_sq positivity floor.
class RadiusCollapse : public Error {
 public:
  using Error::Error;
};

class AlphaTooLarge : public Error {
 public:
  using Error::Error;
};

class ReversedFlowStall : public Error {
 public:
  using Error::Error;
};

class PhasePredicateFailed : public Error {
 public:
  PhasePredicateFailed(int step, const std::string& what)
      : Error("ldp", "step " + std::to_string(step) + ": " + what), step_(step) {}

  int step() const noexcept { return step_; }

 private:
  int step_;
};

class ProxyEmpty : public Error {
 public:
  using Error::Error;
};

class NoFitPossible : public Error {
 public:
  using Error::Error;
};

// A campaign cell fell below the 90% uncensored rule. Statistical, not a bug.
class TooCensored : public Error {
 public:
  using Error::Error;
};

// A fitted claim was requested with fewer replicas than the campaign rule allows.
class TooFewReplicas : public Error {
 public:
  using Error::Error;
};

}  // namespace gradsync
