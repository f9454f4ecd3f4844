#include "qsync/discrete_phase.hpp"

#include <cmath>

#include "qsync/spectra.hpp"
#include "qsync/spectral.hpp"

namespace qsync {

namespace {

double unwrap_near(double value, double reference) {
  double d = value - reference;
  return value - kTwoPi * std::round(d / kTwoPi);
}

}  // namespace

ProjectedPhases project_and_diff(const CoupledModel& family,
                                 const std::vector<double>& kappa_grid) {
  if (family.kind != ModelKind::Discrete9D)
    throw std::invalid_argument("project_and_diff: expects the discrete model");
  if (kappa_grid.empty()) throw std::invalid_argument("project_and_diff: empty kappa grid");

  // P_A = [I I I] marginalizes over the B state; P_B = I (x) [1 1 1] over A.
  Eigen::MatrixXd pa = Eigen::MatrixXd::Zero(3, 9), pb = Eigen::MatrixXd::Zero(3, 9);
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) {
      pa(i, 3 * j + i) = 1.0;
      pb(j, 3 * j + i) = 1.0;
    }

  ProjectedPhases out;
  out.kappa_values = kappa_grid;
  out.phase_a.resize(kappa_grid.size());
  out.phase_b.resize(kappa_grid.size());
  out.phase_diff.resize(kappa_grid.size());
  out.within_diff.resize(kappa_grid.size());
  out.degenerate.assign(kappa_grid.size(), false);

  VectorXcd prev_qa;
  Eigen::Vector3d prev_diff = Eigen::Vector3d::Zero(), prev_within = Eigen::Vector3d::Zero();
  bool have_prev = false;

  for (std::size_t gi = 0; gi < kappa_grid.size(); ++gi) {
    CoupledModel m = family.with(family.tau, kappa_grid[gi]);
    MatrixXcd ct = discrete_rate_matrix(m).transpose().cast<Complex>();
    EigResult er = eig_dense(ct);
    auto idx = leading_oscillatory_pair(er);
    VectorXcd q1 = er.pairs[idx[0]].right, q2 = er.pairs[idx[1]].right;
    Complex l1 = er.pairs[idx[0]].lambda, l2 = er.pairs[idx[1]].lambda;

    DiscreteStationary rho = std::get<DiscreteStationary>(stationary_density(m));
    StationaryDensity rhov = rho;
    auto normalize = [&](VectorXcd& q) {
      double var = 0;
      for (int s = 0; s < 9; ++s) var += rho.p(s) * std::norm(q(s));
      q /= std::sqrt(var);
    };
    normalize(q1);
    normalize(q2);

    // assign (A-mode, B-mode): continuity against the previous grid point;
    // at the first point the A mode (rates omega+tau) decays faster for tau>0
    VectorXcd qa, qb;
    if (have_prev) {
      double s1 = std::abs(prev_qa.dot(q1));  // Hermitian overlap
      double s2 = std::abs(prev_qa.dot(q2));
      if (s1 >= s2) { qa = q1; qb = q2; } else { qa = q2; qb = q1; }
    } else {
      bool first_is_a = (family.tau > 0) ? (l1.real() < l2.real()) : (l1.real() > l2.real());
      if (first_is_a) { qa = q1; qb = q2; } else { qa = q2; qb = q1; }
    }
    prev_qa = qa;
    have_prev = true;

    // gauge: rotate the B mode so the modal overlap is real nonnegative
    GaugeResult g = gauge_align(StateFunction{qa}, StateFunction{qb}, rhov);
    if (g.degenerate) out.degenerate[gi] = true;
    qb = std::get<StateFunction>(g.rotated_minus).values;

    Eigen::Vector3cd va = pa.cast<Complex>() * qa;
    Eigen::Vector3cd vb = pb.cast<Complex>() * qb;
    for (int s = 0; s < 3; ++s)
      if (std::abs(va(s)) < 1e-12 || std::abs(vb(s)) < 1e-12) out.degenerate[gi] = true;

    Eigen::Vector3d phia, phib, diff, within;
    for (int s = 0; s < 3; ++s) {
      phia(s) = std::arg(va(s));
      phib(s) = std::arg(vb(s));
      diff(s) = phia(s) - phib(s);
    }
    within(0) = phia(0) - phia(1);
    within(1) = phia(1) - phia(2);
    within(2) = phib(0) - phib(1);
    if (gi > 0) {
      for (int s = 0; s < 3; ++s) {
        diff(s) = unwrap_near(diff(s), prev_diff(s));
        within(s) = unwrap_near(within(s), prev_within(s));
      }
    }
    prev_diff = diff;
    prev_within = within;
    out.phase_a[gi] = phia;
    out.phase_b[gi] = phib;
    out.phase_diff[gi] = diff;
    out.within_diff[gi] = within;
  }
  return out;
}

}  // namespace qsync
