#include "qsync/tongue.hpp"

#include <algorithm>
#include <cmath>

#include "qsync/cf_solver.hpp"
#include "qsync/parallel.hpp"
#include "qsync/perturbation.hpp"
#include "qsync/spectral.hpp"

namespace qsync {

const char* sync_class_name(SyncClass c) {
  switch (c) {
    case SyncClass::Synchronized: return "synchronized";
    case SyncClass::NotSynchronized: return "not_synchronized";
    case SyncClass::Boundary: return "boundary";
    case SyncClass::Failed: return "failed";
  }
  return "?";
}

namespace {

std::pair<Complex, Complex> leading_pair_of(const CoupledModel& m, int ring_J) {
  if (m.is_ring()) return ring_leading_pair(m, ring_J);
  EigResult er = eig_dense(generator_matrix(m).cast<Complex>());
  auto idx = leading_oscillatory_pair(er);
  return {er.pairs[idx[0]].lambda, er.pairs[idx[1]].lambda};
}

}  // namespace

SyncClass classify_point(const CoupledModel& m, const ClassifyOptions& opts) {
  if (m.kind == ModelKind::Discrete9D) {
    // Mixed-split discriminant: both parts split off the locus; the exact
    // coalescence locus decides the side.
    double s = 4.0 * m.kappa * m.kappa - 3.0 * m.tau * m.tau;
    double scale = 4.0 * m.kappa * m.kappa + 3.0 * m.tau * m.tau;
    if (std::abs(s) <= 1e-9 * std::max(scale, 1e-300)) return SyncClass::Boundary;
    return s > 0 ? SyncClass::Synchronized : SyncClass::NotSynchronized;
  }
  Complex lam1 = unperturbed_eigendata(m.with(0.0, 0.0)).lambda1;
  const double tol_im = opts.tol_im_rel * std::abs(lam1.imag());
  const double tol_re = opts.tol_re_rel * std::max(std::abs(lam1.real()), 1e-12);
  auto [lp, lm] = leading_pair_of(m, opts.ring_J);
  double d_re = std::abs(lp.real() - lm.real());
  double d_im = std::abs(lp.imag() - lm.imag());
  if (d_im <= tol_im && d_re > tol_re) return SyncClass::Synchronized;
  if (d_re <= tol_re && d_im > tol_im) return SyncClass::NotSynchronized;
  return SyncClass::Boundary;
}

TongueGrid sweep(const CoupledModel& family, const std::vector<double>& tau_grid,
                 const std::vector<double>& kappa_grid, const TongueOptions& opts) {
  if (tau_grid.empty() || kappa_grid.empty())
    throw std::invalid_argument("sweep: tau and kappa grids must be nonempty");
  for (double k : kappa_grid)
    if (k < 0) throw std::invalid_argument("sweep: kappa grid must be nonnegative");

  TongueGrid grid;
  grid.kind = family.kind;
  grid.method = family.is_ring() ? TongueGrid::Method::CFSolver : TongueGrid::Method::ExactMatrix;
  grid.tau_values = tau_grid;
  grid.kappa_values = kappa_grid;
  grid.classification.assign(tau_grid.size(),
                             std::vector<SyncClass>(kappa_grid.size(), SyncClass::Failed));
  grid.boundary_curve.assign(tau_grid.size(), std::nullopt);
  grid.analytic_line.assign(tau_grid.size(), std::nullopt);

  const double kappa_max = *std::max_element(kappa_grid.begin(), kappa_grid.end());

  parallel_for(
      tau_grid.size(),
      [&](std::size_t ti) {
        const double tau = tau_grid[ti];
        auto classify = [&](double kappa) {
          try {
            return classify_point(family.with(tau, kappa), opts.classify);
          } catch (const std::exception&) {
            return SyncClass::Failed;
          }
        };
        for (std::size_t ki = 0; ki < kappa_grid.size(); ++ki)
          grid.classification[ti][ki] = classify(kappa_grid[ki]);

        // analytic first-order boundary, where defined
        try {
          grid.analytic_line[ti] = kt_boundary(family, tau);
        } catch (const std::exception&) {
          grid.analytic_line[ti] = std::nullopt;
        }

        // operational boundary: first kappa at which the pair synchronizes,
        // refined by bisection
        if (tau == 0.0) {
          grid.boundary_curve[ti] = 0.0;
          return;
        }
        double lo = 0.0;
        std::optional<double> hi;
        for (std::size_t ki = 0; ki < kappa_grid.size(); ++ki) {
          SyncClass c = grid.classification[ti][ki];
          if (c == SyncClass::NotSynchronized) lo = std::max(lo, kappa_grid[ki]);
          if (c == SyncClass::Synchronized || c == SyncClass::Boundary) {
            hi = hi ? std::min(*hi, kappa_grid[ki]) : kappa_grid[ki];
          }
        }
        if (!hi) {
          // nothing synchronized in range (RingCos case): no boundary
          grid.boundary_curve[ti] = std::nullopt;
          return;
        }
        double a = std::min(lo, *hi), b = std::max(lo, *hi);
        if (a == b) {
          grid.boundary_curve[ti] = a;
          return;
        }
        while (b - a > opts.refine_tol && b - a > 1e-12 * std::max(1.0, kappa_max)) {
          double mid = 0.5 * (a + b);
          SyncClass c = classify(mid);
          if (c == SyncClass::Synchronized || c == SyncClass::Boundary)
            b = mid;
          else
            a = mid;
        }
        grid.boundary_curve[ti] = 0.5 * (a + b);
      },
      opts.threads);

  // monotone-in-kappa sanity: no NotSynchronized above a Synchronized point
  for (std::size_t ti = 0; ti < tau_grid.size(); ++ti) {
    bool seen_sync = false;
    for (std::size_t ki = 0; ki < kappa_grid.size(); ++ki) {
      SyncClass c = grid.classification[ti][ki];
      if (c == SyncClass::Synchronized) seen_sync = true;
      if (seen_sync && c == SyncClass::NotSynchronized) grid.monotone = false;
    }
  }
  return grid;
}

}  // namespace qsync
