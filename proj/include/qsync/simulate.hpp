#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qsync/models.hpp"

namespace qsync {

// Sampled trajectory on a uniform grid.  Continuous models store state rows
// in `values`; the discrete model stores joint-state indices in `states`.
struct Trajectory {
  ModelKind kind;
  double dt = 0;
  uint64_t seed = 0;
  double t0_discard = 10.0;                // discarded by q_series, kept here
  std::vector<Eigen::VectorXd> values;     // continuous models
  std::vector<int> states;                 // Discrete9D
  std::vector<std::pair<double, int>> events;  // optional raw Gillespie event log

  std::size_t size() const {
    return kind == ModelKind::Discrete9D ? states.size() : values.size();
  }
};

// Euler-Maruyama integration of a continuous model.  Gaussian increments of
// variance 2 D dt per component; ring states wrapped into [0, 2pi).
// Deterministic for fixed (model, dt, t_end, seed).  Starts from x0 when
// given, else from the origin.
Trajectory euler_maruyama(const CoupledModel& m, double dt, double t_end, uint64_t seed,
                          const VectorXd* x0 = nullptr);

// Exact stochastic simulation of the discrete model, sampled onto a uniform
// grid by the most recent event (next-neighbor interpolation).
Trajectory gillespie(const CoupledModel& m, double t_end, uint64_t seed,
                     double grid_dt = 2e-4, bool keep_events = false);

struct QSeries {
  double dt = 0;
  std::string label;
  std::vector<Complex> values;
};

// Pointwise evaluation of an eigenfunction along a trajectory, discarding
// t < t0_discard.
QSeries q_series(const Trajectory& traj, const EigenfunctionDescriptor& f,
                 const std::string& label, double t0_discard = 10.0);

QSeries decimate(const QSeries& s, int stride);

// Long-run streaming simulation: integrates (or jumps) through
// burn_in + t_end time units and records every `stride`-th sample of each
// observable, without materializing the trajectory.  Used by the spectra
// pipeline where trajectories would not fit in memory.
std::vector<QSeries> simulate_q_series(const CoupledModel& m,
                                       const std::vector<EigenfunctionDescriptor>& fs,
                                       const std::vector<std::string>& labels, double dt,
                                       double t_end, uint64_t seed, int stride,
                                       double burn_in = 100.0);

}  // namespace qsync
