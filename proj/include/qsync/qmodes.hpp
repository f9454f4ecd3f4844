#pragma once

#include "qsync/models.hpp"

namespace qsync {

// The two leading Q-modes of a coupled model at its current (kappa, tau):
// eigenvalues sorted by Re desc then Im desc (both Im > 0), descriptors
// normalized to unit variance against the coupled stationary density.
struct LeadingModes {
  Complex lambda_plus, lambda_minus;
  EigenfunctionDescriptor q_plus, q_minus;
  StationaryDensity rho;
  Complex overlap;        // <Q+* Q-> before any gauge rotation
  bool cf_fallback = false;  // ring reconstruction fell back to the dense eigenvector
};

LeadingModes leading_modes(const CoupledModel& m, int ring_J = 100, int ring_M = 50);

// Raw-coordinate comparison observable (x2 + i x1, exp(ix), or the
// three-phase state proxy); a documented stand-in, not part of the theory.
EigenfunctionDescriptor raw_observable(const CoupledModel& m);

}  // namespace qsync
