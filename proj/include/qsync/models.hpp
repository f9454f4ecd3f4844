#pragma once

#include <functional>
#include <utility>
#include <variant>

#include "qsync/types.hpp"

namespace qsync {

enum class ModelKind { Linear4D, Ring2D, RingCos2D, Discrete9D };

const char* model_kind_name(ModelKind kind);

// One of the model systems together with its (kappa, tau) perturbation.
// Immutable after construction; factory functions validate parameters.
struct CoupledModel {
  ModelKind kind;
  double omega = 0;      // base angular frequency / transition rate
  double tau = 0;        // detuning applied to the first oscillator
  double kappa = 0;      // symmetric coupling strength
  double eta = 0;        // linear damping (Linear4D only)
  double diffusion = 0;  // noise intensity D (continuous models only)

  static CoupledModel linear4d(double eta, double omega, double tau, double kappa, double D);
  static CoupledModel ring(double omega, double tau, double kappa, double D);
  static CoupledModel ring_cos(double omega, double tau, double kappa, double D);
  static CoupledModel discrete9(double omega, double tau, double kappa);

  // Same family, different perturbation (re-validated).
  CoupledModel with(double new_tau, double new_kappa) const;

  bool continuous() const { return kind != ModelKind::Discrete9D; }
  bool is_ring() const { return kind == ModelKind::Ring2D || kind == ModelKind::RingCos2D; }
  int state_dim() const;
};

// ---------------------------------------------------------------------------
// Eigenfunction descriptors.  Closed-form tokens, not sampled grids, so the
// perturbation pairings can be evaluated exactly.

// f(z) = coeffs . z, for the 4D linear model (z = [x1 x2 y1 y2]).
struct LinearForm {
  Vector4cd coeffs;
};

// Truncated coefficient vector on a fixed lattice j + k = N of the torus
// Fourier basis: f(x,y) = sum_j z[j+J] exp(i(j x + (N-j) y)).
struct FourierField {
  int N = 1;
  int J = 0;
  VectorXcd z;  // size 2J+1, index j+J

  Complex coeff(int j) const {
    return (j < -J || j > J) ? Complex(0, 0) : z(j + J);
  }
  Complex eval(double x, double y) const;
};

// One complex value per discrete joint state.
struct StateFunction {
  VectorXcd values;
};

using EigenfunctionDescriptor = std::variant<LinearForm, FourierField, StateFunction>;

Complex eval_observable(const EigenfunctionDescriptor& f, const VectorXd& continuous_state,
                        int discrete_state);

// ---------------------------------------------------------------------------
// Stationary densities (exact for the current (kappa, tau)).

struct GaussianStationary {
  Eigen::Matrix4d cov;  // zero-mean Gaussian on R^4
};
struct RingStationary {
  FourierField field;  // N = 0 lattice, integrates to one
};
struct DiscreteStationary {
  VectorXd p;  // 9 probabilities, sums to one
};
using StationaryDensity = std::variant<GaussianStationary, RingStationary, DiscreteStationary>;

// ---------------------------------------------------------------------------

struct UnperturbedEigendata {
  Complex lambda1;                       // leading nontrivial eigenvalue, Im > 0
  EigenfunctionDescriptor q1x, q1y;      // unit-variance backward eigenfunctions
  EigenfunctionDescriptor p1x, p1y;      // forward partners, biorthonormal to q's
};

// Drift matrix A(tau, kappa) of the 4D linear model, and its decomposition
// A = base + tau * tau_part + kappa * kappa_part.
Eigen::Matrix4d linear_drift(const CoupledModel& m);
Eigen::Matrix4d linear_drift_base(const CoupledModel& m);
Eigen::Matrix4d linear_drift_tau_part();
Eigen::Matrix4d linear_drift_kappa_part();

// Transition-rate matrix C(omega, tau, kappa) of the discrete model (column
// sums zero; probabilities evolve as dp/dt = C p, observables as df/dt = C^T f)
// and its decomposition C = base + tau * tau_part + kappa * kappa_part.
Eigen::MatrixXd discrete_rate_matrix(const CoupledModel& m);
Eigen::MatrixXd discrete_rate_base(const CoupledModel& m);
Eigen::MatrixXd discrete_rate_tau_part();
Eigen::MatrixXd discrete_rate_kappa_part();

// Exact finite generator where one exists (Linear4D: drift matrix A;
// Discrete9D: rate matrix C).  Ring models have none and throw.
Eigen::MatrixXd generator_matrix(const CoupledModel& m);

// Closed-form leading eigenvalue branch pair (lambda_plus, lambda_minus),
// both with positive imaginary part.  Linear4D and Discrete9D only.
std::pair<Complex, Complex> exact_lambda_pm(const CoupledModel& m);

// Closed-form eigendata of the uncoupled, identical system (kappa = tau = 0).
UnperturbedEigendata unperturbed_eigendata(const CoupledModel& m);

// |Im(lambda1) / Re(lambda1)|; throws for Re = 0.
double quality_factor(Complex lambda1);

// Exact stationary density at the model's current (kappa, tau).
StationaryDensity stationary_density(const CoupledModel& m, int ring_J = 40);

// Backward generator applied to a closed-form descriptor, evaluated at a
// point (continuous kinds) or state index (Discrete9D).
Complex apply_backward_generator(const CoupledModel& m, const EigenfunctionDescriptor& f,
                                 const VectorXd& point, int state = -1);

// Finite-difference fallback for arbitrary smooth observables on the
// continuous models (central differences, 5-point second-derivative stencil).
Complex apply_backward_generator_fd(const CoupledModel& m,
                                    const std::function<Complex(const VectorXd&)>& f,
                                    const VectorXd& point, double h = 1e-5);

// ---------------------------------------------------------------------------
// Robustly-oscillatory validation (predicate over a computed spectrum).

struct OscillatoryReport {
  bool stable = false;            // all nonzero eigenvalues have Re < 0
  bool unique_leading = false;    // leading complex pair is a unique conjugate pair
  double quality = 0.0;           // |Im/Re| of the leading pair
  double gap_ratio = 0.0;         // Re(lambda') / Re(lambda1) of the runner-up
  double upsilon = 1.0;           // gap threshold the ratio was compared against
  bool gap_ok = false;            // gap_ratio > upsilon
  bool quality_large = false;     // quality > 1
};

// `spectrum` holds eigenvalues including the stationary one near zero.
OscillatoryReport validate_robustly_oscillatory(const VectorXcd& spectrum, double upsilon = 1.0);

}  // namespace qsync
