#pragma once

#include <optional>
#include <vector>

#include "qsync/models.hpp"

namespace qsync {

enum class SyncClass { Synchronized, NotSynchronized, Boundary, Failed };

const char* sync_class_name(SyncClass c);

struct ClassifyOptions {
  double tol_im_rel = 1e-6;  // scaled by |Im lambda1| of the unperturbed mode
  double tol_re_rel = 1e-6;  // scaled by |Re lambda1|
  int ring_J = 100;          // Galerkin truncation for the ring models
};

// Classification by the leading eigenvalue pair: Synchronized when the
// imaginary parts have merged and the real parts split, NotSynchronized for
// the converse, Boundary within both tolerances.  The discrete model splits
// in both parts away from its coalescence locus, so its classification uses
// the side of the exact locus 3 tau^2 = 4 kappa^2.
SyncClass classify_point(const CoupledModel& m, const ClassifyOptions& opts = {});

struct TongueOptions {
  ClassifyOptions classify;
  double refine_tol = 1e-4;  // bisection tolerance in kappa
  unsigned threads = 0;      // 0: hardware concurrency
};

struct TongueGrid {
  std::vector<double> tau_values;
  std::vector<double> kappa_values;
  std::vector<std::vector<SyncClass>> classification;  // [tau][kappa]
  std::vector<std::optional<double>> boundary_curve;   // refined kappa* per tau
  std::vector<std::optional<double>> analytic_line;    // first-order K(tau) per tau
  bool monotone = true;  // classification monotone in kappa for every tau
  ModelKind kind;
  enum class Method { ExactMatrix, CFSolver } method;
};

TongueGrid sweep(const CoupledModel& family, const std::vector<double>& tau_grid,
                 const std::vector<double>& kappa_grid, const TongueOptions& opts = {});

}  // namespace qsync
