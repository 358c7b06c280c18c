#pragma once

#include <stdexcept>
#include <string>

namespace lukcon {

/// Malformed or inconsistent user input (formula text, problem file, ids).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Formula syntax error carrying the 1-based source position.
class SyntaxError : public InputError {
 public:
  SyntaxError(const std::string& what, int line, int column)
      : InputError(what + " at line " + std::to_string(line) + ", column " +
                   std::to_string(column)),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// The constraint system has no feasible point. `phase_one_value` is the
/// optimum of the phase-1 problem (sum of artificial infeasibilities), which
/// is strictly positive and serves as the certificate.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, double phase_one_value)
      : std::runtime_error(what), phase_one_value_(phase_one_value) {}

  double phase_one_value() const { return phase_one_value_; }

 private:
  double phase_one_value_;
};

class UnboundedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IterationLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A linear system expected to be consistent is not (residual above
/// tolerance), e.g. a stale multiplier target.
class InconsistentSystemError : public std::runtime_error {
 public:
  InconsistentSystemError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}

  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Raised by combinatorial searches whose size guard is exceeded.
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lukcon
