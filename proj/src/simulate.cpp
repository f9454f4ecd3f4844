#include "qsync/simulate.hpp"

#include <cmath>
#include <sstream>

#include "qsync/rng.hpp"

namespace qsync {

namespace {

void em_step_linear(const Eigen::Matrix4d& a, double dt, double noise_amp, VectorXd& z,
                    Rng& rng) {
  Eigen::Vector4d g;
  for (int i = 0; i < 4; ++i) g(i) = rng.normal();
  z = z + dt * (a * z) + noise_amp * g;
}

void em_step_ring(const CoupledModel& m, double dt, double noise_amp, VectorXd& z, Rng& rng) {
  double x = z(0), y = z(1);
  double cx, cy;
  if (m.kind == ModelKind::Ring2D) {
    cx = std::sin(y - x);
    cy = std::sin(x - y);
  } else {
    cx = std::cos(y - x);
    cy = std::cos(x - y);
  }
  z(0) = wrap_2pi(x + dt * (m.omega + m.tau + m.kappa * cx) + noise_amp * rng.normal());
  z(1) = wrap_2pi(y + dt * (m.omega + m.kappa * cy) + noise_amp * rng.normal());
}

}  // namespace

Trajectory euler_maruyama(const CoupledModel& m, double dt, double t_end, uint64_t seed,
                          const VectorXd* x0) {
  if (!m.continuous())
    throw std::invalid_argument("euler_maruyama: discrete model; use gillespie");
  if (!(dt > 0)) throw std::invalid_argument("euler_maruyama: dt must be positive");
  const long nsteps = static_cast<long>(std::llround(t_end / dt));
  if (nsteps < 1) throw std::invalid_argument("euler_maruyama: t_end shorter than one step");
  const int dim = m.state_dim();
  if (static_cast<double>(nsteps) * dim > 2.5e8)
    throw std::invalid_argument(
        "euler_maruyama: trajectory too large to materialize; use simulate_q_series");

  Trajectory traj;
  traj.kind = m.kind;
  traj.dt = dt;
  traj.seed = seed;
  traj.values.reserve(nsteps + 1);

  Rng rng(seed);
  const double noise_amp = std::sqrt(2.0 * m.diffusion * dt);
  VectorXd z = VectorXd::Zero(dim);
  if (x0) {
    if (x0->size() != dim) throw std::invalid_argument("euler_maruyama: x0 dimension mismatch");
    z = *x0;
    if (m.is_ring())
      for (int i = 0; i < dim; ++i) z(i) = wrap_2pi(z(i));
  }
  Eigen::Matrix4d a;
  if (m.kind == ModelKind::Linear4D) a = linear_drift(m);
  traj.values.push_back(z);
  for (long s = 0; s < nsteps; ++s) {
    if (m.kind == ModelKind::Linear4D)
      em_step_linear(a, dt, noise_amp, z, rng);
    else
      em_step_ring(m, dt, noise_amp, z, rng);
    if (!z.allFinite()) {
      std::ostringstream os;
      os << "euler_maruyama: non-finite state at step " << s;
      throw NumericalError(os.str());
    }
    traj.values.push_back(z);
  }
  return traj;
}

Trajectory gillespie(const CoupledModel& m, double t_end, uint64_t seed, double grid_dt,
                     bool keep_events) {
  if (m.kind != ModelKind::Discrete9D)
    throw std::invalid_argument("gillespie: expects the discrete model");
  if (!(grid_dt > 0)) throw std::invalid_argument("gillespie: grid_dt must be positive");

  const Eigen::MatrixXd c = discrete_rate_matrix(m);
  Trajectory traj;
  traj.kind = m.kind;
  traj.dt = grid_dt;
  traj.seed = seed;
  const long ngrid = static_cast<long>(std::floor(t_end / grid_dt)) + 1;
  traj.states.reserve(ngrid);

  Rng rng(seed);
  int state = static_cast<int>(rng.next_u64() % 9);
  double t = 0;
  if (keep_events) traj.events.push_back({0.0, state});
  long filled = 0;
  while (filled < ngrid) {
    double total = -c(state, state);
    if (!(total > 0)) {
      std::ostringstream os;
      os << "gillespie: zero total propensity in state " << state;
      throw NumericalError(os.str());
    }
    double wait = -std::log(rng.uniform_pos()) / total;
    double t_next = t + wait;
    // fill grid points covered by the current state
    while (filled < ngrid && filled * grid_dt < t_next) {
      traj.states.push_back(state);
      ++filled;
    }
    // choose the jump target
    double u = rng.uniform() * total;
    double acc = 0;
    int target = -1;
    for (int r = 0; r < 9; ++r) {
      if (r == state) continue;
      acc += c(r, state);
      if (u <= acc) { target = r; break; }
    }
    if (target < 0) {  // guard against rounding at the top of the cumulative sum
      for (int r = 8; r >= 0; --r)
        if (r != state && c(r, state) > 0) { target = r; break; }
    }
    state = target;
    t = t_next;
    if (keep_events) traj.events.push_back({t, state});
  }
  return traj;
}

QSeries q_series(const Trajectory& traj, const EigenfunctionDescriptor& f,
                 const std::string& label, double t0_discard) {
  QSeries out;
  out.dt = traj.dt;
  out.label = label;
  const long skip = static_cast<long>(std::ceil(t0_discard / traj.dt));
  const long n = static_cast<long>(traj.size());
  if (skip >= n) throw std::invalid_argument("q_series: discard window exceeds trajectory");
  out.values.reserve(n - skip);
  for (long i = skip; i < n; ++i) {
    if (traj.kind == ModelKind::Discrete9D)
      out.values.push_back(eval_observable(f, VectorXd(), traj.states[i]));
    else
      out.values.push_back(eval_observable(f, traj.values[i], -1));
  }
  return out;
}

QSeries decimate(const QSeries& s, int stride) {
  if (stride < 1) throw std::invalid_argument("decimate: stride must be >= 1");
  QSeries out;
  out.dt = s.dt * stride;
  out.label = s.label;
  out.values.reserve(s.values.size() / stride + 1);
  for (std::size_t i = 0; i < s.values.size(); i += stride) out.values.push_back(s.values[i]);
  return out;
}

std::vector<QSeries> simulate_q_series(const CoupledModel& m,
                                       const std::vector<EigenfunctionDescriptor>& fs,
                                       const std::vector<std::string>& labels, double dt,
                                       double t_end, uint64_t seed, int stride,
                                       double burn_in) {
  if (fs.size() != labels.size())
    throw std::invalid_argument("simulate_q_series: labels/descriptors size mismatch");
  if (stride < 1) throw std::invalid_argument("simulate_q_series: stride must be >= 1");

  std::vector<QSeries> out(fs.size());
  for (std::size_t i = 0; i < fs.size(); ++i) {
    out[i].dt = dt * stride;
    out[i].label = labels[i];
  }

  if (m.kind == ModelKind::Discrete9D) {
    const Eigen::MatrixXd c = discrete_rate_matrix(m);
    Rng rng(seed);
    int state = static_cast<int>(rng.next_u64() % 9);
    double t = 0;
    long filled = 0;
    const long nburn = static_cast<long>(std::ceil(burn_in / dt));
    const long ngrid = nburn + static_cast<long>(std::floor(t_end / dt)) + 1;
    while (filled < ngrid) {
      double total = -c(state, state);
      double wait = -std::log(rng.uniform_pos()) / total;
      double t_next = t + wait;
      while (filled < ngrid && filled * dt < t_next) {
        long rel = filled - nburn;
        if (rel >= 0 && rel % stride == 0)
          for (std::size_t q = 0; q < fs.size(); ++q)
            out[q].values.push_back(eval_observable(fs[q], VectorXd(), state));
        ++filled;
      }
      double u = rng.uniform() * total;
      double acc = 0;
      int target = -1;
      for (int r = 0; r < 9; ++r) {
        if (r == state) continue;
        acc += c(r, state);
        if (u <= acc) { target = r; break; }
      }
      if (target < 0)
        for (int r = 8; r >= 0; --r)
          if (r != state && c(r, state) > 0) { target = r; break; }
      state = target;
      t = t_next;
    }
    return out;
  }

  if (!(dt > 0)) throw std::invalid_argument("simulate_q_series: dt must be positive");
  const long nburn = static_cast<long>(std::llround(burn_in / dt));
  const long nsteps = static_cast<long>(std::llround(t_end / dt));
  Rng rng(seed);
  const double noise_amp = std::sqrt(2.0 * m.diffusion * dt);
  VectorXd z = VectorXd::Zero(m.state_dim());
  Eigen::Matrix4d a;
  if (m.kind == ModelKind::Linear4D) a = linear_drift(m);
  for (long s = 0; s < nburn; ++s) {
    if (m.kind == ModelKind::Linear4D)
      em_step_linear(a, dt, noise_amp, z, rng);
    else
      em_step_ring(m, dt, noise_amp, z, rng);
  }
  for (long s = 0; s < nsteps; ++s) {
    if (m.kind == ModelKind::Linear4D)
      em_step_linear(a, dt, noise_amp, z, rng);
    else
      em_step_ring(m, dt, noise_amp, z, rng);
    if (s % (1 << 12) == 0 && !z.allFinite()) {
      std::ostringstream os;
      os << "simulate_q_series: non-finite state at step " << s;
      throw NumericalError(os.str());
    }
    if (s % stride == 0)
      for (std::size_t q = 0; q < fs.size(); ++q)
        out[q].values.push_back(eval_observable(fs[q], z, -1));
  }
  return out;
}

}  // namespace qsync
