#pragma once

#include <stdexcept>
#include <string>

namespace oscgrid {

// Malformed or physically meaningless input (bad graph, degenerate line, schema violation).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Set-points for which no power-flow solution was found.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// Evaluation outside the domain of a chart or projection.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, double last_finite_time)
      : std::runtime_error(what), last_finite_time_(last_finite_time) {}
  double last_finite_time() const noexcept { return last_finite_time_; }

 private:
  double last_finite_time_;
};

namespace detail {

// Internal identity checks that should never fail on valid input.
inline void ensure(bool condition, const char* what) {
  if (!condition) throw std::logic_error(std::string("internal consistency check failed: ") + what);
}

}  // namespace detail

}  // namespace oscgrid
