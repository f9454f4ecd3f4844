// Test-only oracles, independent of the implementation paths they check.
#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "qsync/models.hpp"

namespace qsync::testing {

// Galerkin matrix elements of the ring backward operator by 2D trapezoid
// quadrature (spectrally exact for trigonometric integrands), assembled on
// the lattice j + k = N without using the analytic recurrence.
inline MatrixXcd quadrature_backward_block(const CoupledModel& m, int N, int J,
                                           int ngrid = 64) {
  const int n = 2 * J + 1;
  MatrixXcd a = MatrixXcd::Zero(n, n);
  const double h = kTwoPi / ngrid;
  for (int col = 0; col < n; ++col) {
    int j = col - J, k = N - j;
    for (int row = 0; row < n; ++row) {
      int jp = row - J, kp = N - jp;
      Complex acc(0, 0);
      for (int ix = 0; ix < ngrid; ++ix)
        for (int iy = 0; iy < ngrid; ++iy) {
          double x = ix * h, y = iy * h;
          double cx = (m.kind == ModelKind::RingCos2D) ? std::cos(y - x) : std::sin(y - x);
          double cy = (m.kind == ModelKind::RingCos2D) ? std::cos(x - y) : std::sin(x - y);
          double fx = m.omega + m.tau + m.kappa * cx;
          double fy = m.omega + m.kappa * cy;
          Complex e = std::polar(1.0, j * x + k * y);
          Complex le = fx * Complex(0, j) * e + fy * Complex(0, k) * e -
                       m.diffusion * double(j * j + k * k) * e;
          acc += le * std::polar(1.0, -(jp * x + kp * y));
        }
      a(row, col) = acc / double(ngrid) / double(ngrid);
    }
  }
  return a;
}

// Least-squares fit of log(err) vs log(x); returns the slope.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& err) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i) {
    double lx = std::log(x[i]), ly = std::log(err[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline double angle_between(const VectorXcd& a, const VectorXcd& b) {
  double c = std::abs(a.dot(b)) / (a.norm() * b.norm());
  return std::acos(std::min(1.0, c));
}

}  // namespace qsync::testing
