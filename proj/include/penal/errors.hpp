#pragma once

#include <stdexcept>
#include <string>

namespace penal {

// Invalid grid, levels, or other user-supplied configuration.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// A weight family violates one of its admissibility hypotheses.
class AdmissibilityError : public std::invalid_argument {
  public:
    AdmissibilityError(std::string condition, const std::string& detail)
        : std::invalid_argument(condition + ": " + detail), condition_(std::move(condition)) {}
    const std::string& condition() const { return condition_; }

  private:
    std::string condition_;
};

// A state that is inconsistent as a set of path functionals (e.g. S < X).
class StateError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// The martingale vanished; the drift is undefined there.
class AbsorbedError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

}  // namespace penal
