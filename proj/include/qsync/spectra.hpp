#pragma once

#include <string>

#include "qsync/models.hpp"
#include "qsync/simulate.hpp"

namespace qsync {

// Spectrum over an angular-frequency grid.  Convention throughout: the
// spectrum is the Fourier transform of the stationary (cross-)covariance
// with kernel exp(-i nu t), so a unit-variance eigenfunction series with
// eigenvalue mu + i omega has the Lorentzian 2|mu| / (mu^2 + (nu-omega)^2),
// and 1/(2 pi) integral S(nu) d nu recovers the variance.
struct SpectralEstimate {
  enum class Kind { Power, Cross };
  enum class Method { Analytic, Welch };
  VectorXd freqs;    // strictly increasing, full axis (complex series)
  VectorXcd values;  // Power: real nonnegative up to estimator noise
  Kind kind = Kind::Power;
  Method method = Method::Analytic;
  int segment_len = 0;     // Welch metadata
  double overlap = 0;      // Welch metadata
  std::string window;      // Welch metadata
};

SpectralEstimate lorentzian_power(Complex lambda, const VectorXd& freqs);

// Two-pole cross spectrum with the supplied modal overlap <Q+* Q->.
SpectralEstimate analytic_cross(Complex lambda_plus, Complex lambda_minus, Complex overlap,
                                const VectorXd& freqs);

// <a* b> against a stationary density: integral of a . conj(b) . rho.
Complex stationary_overlap(const EigenfunctionDescriptor& a, const EigenfunctionDescriptor& b,
                           const StationaryDensity& rho);
double stationary_variance(const EigenfunctionDescriptor& a, const StationaryDensity& rho);

// Rescale to unit variance against rho.
EigenfunctionDescriptor normalize_unit_variance(const EigenfunctionDescriptor& a,
                                                const StationaryDensity& rho);

struct GaugeResult {
  double alpha = 0;            // rotation angle in [0, 2pi)
  Complex aligned_overlap;     // real and nonnegative when defined
  bool degenerate = false;     // zero overlap; alpha undefined
  EigenfunctionDescriptor rotated_minus;  // q_minus * exp(i alpha)
};

// Fixes the relative complex rotation of q_minus so that the modal overlap
// <Q+* Q-> becomes real and nonnegative.  Inputs must be unit-variance
// against rho.
GaugeResult gauge_align(const EigenfunctionDescriptor& q_plus,
                        const EigenfunctionDescriptor& q_minus, const StationaryDensity& rho);

// Welch-averaged periodograms of complex series (Hann window).
SpectralEstimate welch_psd(const QSeries& series, int segment_len, double overlap_frac = 0.5);
SpectralEstimate welch_csd(const QSeries& a, const QSeries& b, int segment_len,
                           double overlap_frac = 0.5);

}  // namespace qsync
