#pragma once

#include <optional>

#include "qsync/models.hpp"

namespace qsync {

// First-order perturbation matrix of the leading eigenvalue pair, split into
// its affine parts: entries = tau * m_tau + kappa * m_kappa.
//
// For the SDE-form models the pairings are evaluated in closed form against
// the natural unperturbed eigenfunctions, m_tau = diag(a1, d1) with
// b1 = c1 = 0, and m_kappa = [[alpha, beta], [beta, alpha]].  The discrete
// model's perturbation does not fit that template; `entries` then reproduces
// the published matrix verbatim (a similarity transform of the natural one,
// same trace/determinant/eigenvalues), and `m_tau_natural`/`m_kappa_natural`
// hold the pairing-basis version used for eigenvector work.
struct MMatrix {
  Eigen::Matrix2cd entries;
  Eigen::Matrix2cd m_tau, m_kappa;                    // published convention
  Eigen::Matrix2cd m_tau_natural, m_kappa_natural;    // pairing basis
  Complex a1, b1, c1, d1;  // detuning pairings (natural basis)
  Complex alpha, beta;     // coupling pairings (natural basis)
  double kappa = 0, tau = 0;
  ModelKind kind;

  Eigen::Matrix2cd natural() const { return tau * m_tau_natural + kappa * m_kappa_natural; }
};

MMatrix build_m_matrix(const CoupledModel& m);

enum class SplitRegime { SplitRealParts, Coalesced, SplitImagParts, MixedSplit, NoSplit };

const char* split_regime_name(SplitRegime r);

struct SplittingReport {
  Complex discriminant;     // principal branch of sqrt(trace^2 - 4 det)
  Complex upsilon;          // trace / 2
  Complex lambda_c_plus, lambda_c_minus;  // upsilon +- discriminant/2
  Vector2cd v_plus, v_minus;  // eigenvectors in the natural (Q1x, Q1y) basis
  SplitRegime regime = SplitRegime::NoSplit;
  bool defective = false;   // coalesced without a scalar M
};

SplittingReport splitting_report(const MMatrix& m, double regime_tol = 1e-9);

// Nonnegative real root kappa* of D(kappa, tau*) = 0, if one exists among
// the branches.  Throws when the coupling pairing beta vanishes (the
// no-splitting case); returns nullopt when both roots are non-real.
std::optional<double> kt_boundary(const CoupledModel& family, double tau_star);

// ---------------------------------------------------------------------------
// First-order corrections (bordered least-squares solves).

// First-order stationary-distribution correction.  The ring result lives on
// the N = 0 lattice; the discrete one is a signed 9-vector summing to zero;
// the 4D linear one is the derivative of a Gaussian family, represented by
// the covariance derivative sigma1.
struct GaussianCovarianceCorrection {
  Eigen::Matrix4d sigma0;
  Eigen::Matrix4d sigma1;
  // density derivative at a point: d/deps N(0, sigma0 + eps sigma1)|_0
  double eval(const VectorXd& z) const;
};
using StationaryCorrection =
    std::variant<FourierField, VectorXd, GaussianCovarianceCorrection>;

StationaryCorrection stationary_correction(const CoupledModel& m, int ring_J = 40);

double eval_stationary_correction(const StationaryCorrection& c, const VectorXd& point,
                                  int state = -1);

enum class Branch { Plus, Minus };

struct EigfnCorrection {
  Complex lambda_c;                   // first-order eigenvalue correction
  Vector2cd v;                        // weights of (Q1x, Q1y) in the zeroth order
  EigenfunctionDescriptor zeroth;     // v1 Q1x + v2 Q1y
  EigenfunctionDescriptor correction; // the order-eps update, orthogonal to P1x/P1y
  double residual = 0;                // solve residual (relative)
};

EigfnCorrection eigfn_correction(const CoupledModel& m, Branch branch, int ring_J = 40);

// zeroth + eps * correction, with (kappa, tau) scaling folded into eps by the
// caller (the model's own kappa/tau define the direction).
EigenfunctionDescriptor assemble_first_order(const EigfnCorrection& c, double eps);

}  // namespace qsync
