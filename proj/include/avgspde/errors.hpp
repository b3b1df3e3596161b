#pragma once

#include <stdexcept>
#include <string>

namespace avgspde {

/// Invalid argument or configuration value.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Requested operation needs a structural property the problem lacks
/// (e.g. an exact fast stepper for a nonlinear fast drift).
class UnsupportedFormError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A trajectory left the admissible range (|value| > 1e6 or non-finite).
class BlowUpError : public std::runtime_error {
 public:
  explicit BlowUpError(double time, const std::string& what = "trajectory blew up")
      : std::runtime_error(what + " at t=" + std::to_string(time)), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace avgspde
