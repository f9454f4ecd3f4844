#pragma once

#include <vector>

#include "qsync/models.hpp"

namespace qsync {

// Appendix-style locking diagnostic for the discrete model: the two dominant
// backward eigenvectors, tracked in kappa and gauge-aligned, are projected
// onto the two 3-state subsystems and the complex arguments compared.
struct ProjectedPhases {
  std::vector<double> kappa_values;
  // complex arguments of the projected 3-vectors (A-mode via P_A, B-mode via P_B)
  std::vector<Eigen::Vector3d> phase_a, phase_b;
  // cross differences phase_a - phase_b per state, unwrapped continuously in kappa
  std::vector<Eigen::Vector3d> phase_diff;
  // within-vector differences (gauge invariant): a0-a1, a1-a2, b0-b1
  std::vector<Eigen::Vector3d> within_diff;
  std::vector<bool> degenerate;  // vanishing projected component or zero overlap
};

ProjectedPhases project_and_diff(const CoupledModel& family,
                                 const std::vector<double>& kappa_grid);

}  // namespace qsync
