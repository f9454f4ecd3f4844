#pragma once

#include <vector>

#include "qsync/models.hpp"
#include "qsync/spectral.hpp"

namespace qsync {

// Tridiagonal Galerkin block of the ring backward operator on the lattice
// j + k = N, truncated to j in [-J, J].  sub(i) couples row i to column i-1,
// super(i) to column i+1; diag excludes the eigenvalue shift.
struct TridiagonalBlock {
  int N = 1;
  int J = 0;
  VectorXcd sub, diag, super;

  MatrixXcd dense() const;
};

// Backward (Koopman) block; the forward block is its conjugate transpose.
TridiagonalBlock backward_block(const CoupledModel& m, int N, int J);
TridiagonalBlock forward_block(const CoupledModel& m, int N, int J);

// Affine perturbation parts of the backward block (per unit tau / kappa).
TridiagonalBlock backward_block_tau_part(const CoupledModel& m, int N, int J);
TridiagonalBlock backward_block_kappa_part(const CoupledModel& m, int N, int J);

struct RingSpectrumOptions {
  int n_eigenvectors = 8;        // leading eigenpairs that get vectors attached
  bool check_convergence = false;  // re-solve at J+10 and compare the leading eigenvalue
  double convergence_tol = 1e-8;
  double residual_tol = 1e-8;    // inverse-iteration acceptance
};

struct RingSpectrumResult {
  std::vector<Eigenpair> pairs;  // sorted by Re desc, then Im desc
  bool convergence_warning = false;
  double leading_shift = 0.0;    // |change of leading eigenvalue| at J -> J+10, if checked
};

// Eigenvalues of the truncated backward block (all 2J+1 of them), with
// left/right eigenvectors attached to the leading few.
RingSpectrumResult ring_spectrum(const CoupledModel& m, int N, int J,
                                 const RingSpectrumOptions& opts = {});

// Same for the forward (Fokker-Planck) block.
RingSpectrumResult ring_forward_spectrum(const CoupledModel& m, int N, int J,
                                         const RingSpectrumOptions& opts = {});

struct CfField {
  FourierField field;       // unit variance (sum |z|^2 = 1)
  bool fallback = false;    // continued fraction failed; dense eigenvector returned
  double residual = 0.0;    // relative recurrence residual of the returned field
  int M = 0;                // approximant depth used
};

// Eigenfunction reconstruction through continued-fraction coefficient ratios,
// anchored per the dense eigenvector of `lambda` (which must be an eigenvalue
// of the truncated block to within residual_tol).
CfField cf_eigenfunction(const CoupledModel& m, Complex lambda, int N, int J, int M,
                         double residual_tol = 1e-6);

// Stationary density on the N = 0 lattice at the model's (kappa, tau).
RingStationary ring_stationary_impl(const CoupledModel& m, int J);

// Leading oscillatory pair (Im > 0 branch) of the ring at the model's
// parameters: the top two eigenvalues by real part of the N = 1 block.
std::pair<Complex, Complex> ring_leading_pair(const CoupledModel& m, int J,
                                              const RingSpectrumOptions& opts = {});

}  // namespace qsync
