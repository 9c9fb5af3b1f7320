#pragma once

#include <stdexcept>
#include <string>

namespace deepbarrier {

/// Invalid user-supplied parameters or configuration.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite values produced during a rollout or a backward sweep.
class NumericFault : public std::runtime_error {
 public:
  NumericFault(const std::string& what, long step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  long step() const noexcept { return step_; }

 private:
  long step_;
};

}  // namespace deepbarrier
