#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace optoscatter {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cplx iu{0.0, 1.0};

// Parameter/validation failures: the caller handed us something outside the
// domain contract. Mapped to exit status 2 by the CLI.
class invalid_parameter_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical-convergence family: the computation could not certify its own
// accuracy. Mapped to exit status 3 by the CLI.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class quadrature_error : public numerical_error {
 public:
  using numerical_error::numerical_error;
};

class confluence_error : public numerical_error {
 public:
  using numerical_error::numerical_error;
};

class truncation_error : public numerical_error {
 public:
  using numerical_error::numerical_error;
};

class stiffness_error : public numerical_error {
 public:
  using numerical_error::numerical_error;
};

class coverage_error : public invalid_parameter_error {
 public:
  using invalid_parameter_error::invalid_parameter_error;
};

class degenerate_grid_error : public invalid_parameter_error {
 public:
  using invalid_parameter_error::invalid_parameter_error;
};

}  // namespace optoscatter
