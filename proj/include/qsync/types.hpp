#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qsync {

using Complex = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::Vector2cd;
using Eigen::Vector4cd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Thrown when an algorithm fails numerically (non-convergence, singular
// solve, residual out of tolerance).  Distinct from std::invalid_argument,
// which we reserve for precondition violations.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline double wrap_2pi(double x) {
  double r = std::fmod(x, kTwoPi);
  return r < 0 ? r + kTwoPi : r;
}

// arg(z) mapped into [0, 2pi)
inline double arg_2pi(Complex z) {
  double a = std::arg(z);
  return a < 0 ? a + kTwoPi : a;
}

}  // namespace qsync
