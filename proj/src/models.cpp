#include "qsync/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace qsync {

// Defined in cf_solver.cpp next to the Galerkin block builder.
RingStationary ring_stationary_impl(const CoupledModel& m, int J);

const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Linear4D: return "linear4d";
    case ModelKind::Ring2D: return "ring";
    case ModelKind::RingCos2D: return "ring_cos";
    case ModelKind::Discrete9D: return "discrete9";
  }
  return "?";
}

namespace {

void check_continuous(double omega, double D) {
  if (!(omega > 0)) throw std::invalid_argument("omega must be positive");
  if (D < 0) throw std::invalid_argument("diffusion D must be nonnegative");
}

void require_positive_diffusion(const CoupledModel& m, const char* op) {
  if (m.continuous() && !(m.diffusion > 0)) {
    std::ostringstream os;
    os << op << ": " << model_kind_name(m.kind) << " requires nonsingular diffusion (D > 0)";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

CoupledModel CoupledModel::linear4d(double eta, double omega, double tau, double kappa, double D) {
  check_continuous(omega, D);
  if (!(eta > 0)) throw std::invalid_argument("eta must be positive");
  return {ModelKind::Linear4D, omega, tau, kappa, eta, D};
}

CoupledModel CoupledModel::ring(double omega, double tau, double kappa, double D) {
  check_continuous(omega, D);
  return {ModelKind::Ring2D, omega, tau, kappa, 0.0, D};
}

CoupledModel CoupledModel::ring_cos(double omega, double tau, double kappa, double D) {
  check_continuous(omega, D);
  return {ModelKind::RingCos2D, omega, tau, kappa, 0.0, D};
}

CoupledModel CoupledModel::discrete9(double omega, double tau, double kappa) {
  if (!(omega > 0)) throw std::invalid_argument("omega must be positive");
  if (!(omega + tau > 0)) throw std::invalid_argument("omega + tau must be positive");
  if (kappa < 0) throw std::invalid_argument("kappa must be nonnegative");
  if (!(kappa < std::min(omega, omega + tau))) {
    std::ostringstream os;
    os << "discrete9 requires kappa < min(omega, omega+tau) = " << std::min(omega, omega + tau)
       << " so that state transition rates do not become negative (got kappa=" << kappa << ")";
    throw std::invalid_argument(os.str());
  }
  return {ModelKind::Discrete9D, omega, tau, kappa, 0.0, 0.0};
}

CoupledModel CoupledModel::with(double new_tau, double new_kappa) const {
  switch (kind) {
    case ModelKind::Linear4D: return linear4d(eta, omega, new_tau, new_kappa, diffusion);
    case ModelKind::Ring2D: return ring(omega, new_tau, new_kappa, diffusion);
    case ModelKind::RingCos2D: return ring_cos(omega, new_tau, new_kappa, diffusion);
    case ModelKind::Discrete9D: return discrete9(omega, new_tau, new_kappa);
  }
  throw std::logic_error("unreachable");
}

int CoupledModel::state_dim() const {
  switch (kind) {
    case ModelKind::Linear4D: return 4;
    case ModelKind::Ring2D:
    case ModelKind::RingCos2D: return 2;
    case ModelKind::Discrete9D: return 9;
  }
  return 0;
}

Complex FourierField::eval(double x, double y) const {
  // sum_j z_j exp(i j (x - y)) * exp(i N y), Horner in exp(i(x-y))
  Complex u = std::polar(1.0, x - y);
  Complex acc(0, 0);
  for (int idx = z.size() - 1; idx >= 0; --idx) acc = acc * u + z(idx);
  // acc now equals sum_j z_j u^(j+J); undo the offset and apply exp(iNy)
  return acc * std::polar(1.0, -J * (x - y) + N * y);
}

Complex eval_observable(const EigenfunctionDescriptor& f, const VectorXd& s, int state) {
  if (std::holds_alternative<LinearForm>(f)) {
    const auto& lf = std::get<LinearForm>(f);
    if (s.size() != 4) throw std::invalid_argument("LinearForm expects a 4D state");
    Complex acc(0, 0);
    for (int i = 0; i < 4; ++i) acc += lf.coeffs(i) * s(i);
    return acc;
  }
  if (std::holds_alternative<FourierField>(f)) {
    if (s.size() != 2) throw std::invalid_argument("FourierField expects a 2D state");
    return std::get<FourierField>(f).eval(s(0), s(1));
  }
  const auto& sf = std::get<StateFunction>(f);
  if (state < 0 || state >= sf.values.size())
    throw std::invalid_argument("StateFunction expects a valid state index");
  return sf.values(state);
}

// ---------------------------------------------------------------------------

Eigen::Matrix4d linear_drift_base(const CoupledModel& m) {
  Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
  const double e = m.eta, w = m.omega;
  a(0, 0) = -e; a(0, 1) = w;
  a(1, 0) = -w; a(1, 1) = -e;
  a(2, 2) = -e; a(2, 3) = w;
  a(3, 2) = -w; a(3, 3) = -e;
  return a;
}

Eigen::Matrix4d linear_drift_tau_part() {
  Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
  a(0, 1) = 1;
  a(1, 0) = -1;
  return a;
}

Eigen::Matrix4d linear_drift_kappa_part() {
  Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
  a(0, 0) = -1; a(0, 2) = 1;
  a(1, 1) = -1; a(1, 3) = 1;
  a(2, 0) = 1;  a(2, 2) = -1;
  a(3, 1) = 1;  a(3, 3) = -1;
  return a;
}

Eigen::Matrix4d linear_drift(const CoupledModel& m) {
  return linear_drift_base(m) + m.tau * linear_drift_tau_part() +
         m.kappa * linear_drift_kappa_part();
}

namespace {

// Joint states (A_i, B_j), i cycling fastest: index s = 3*j + i, 0-based.
Eigen::MatrixXd discrete_rates(double om, double tau, double kap) {
  const double o = om, t = tau, k = kap;
  Eigen::MatrixXd C(9, 9);
  C << -2*o-t,  0,       k+o+t,   0,       0,       0,       k+o,     0,       0,
       o+t,     -2*o-t,  0,       0,       0,       0,       0,       -k+o,    0,
       0,       -k+o+t,  -2*o-t,  0,       0,       0,       0,       0,       o,
       o,       0,       0,       -2*o-t,  0,       -k+o+t,  0,       0,       0,
       0,       k+o,     0,       k+o+t,   -2*o-t,  0,       0,       0,       0,
       0,       0,       -k+o,    0,       o+t,     -2*o-t,  0,       0,       0,
       0,       0,       0,       -k+o,    0,       0,       -2*o-t,  0,       o+t,
       0,       0,       0,       0,       o,       0,       -k+o+t,  -2*o-t,  0,
       0,       0,       0,       0,       0,       k+o,     0,       k+o+t,   -2*o-t;
  return C;
}

}  // namespace

Eigen::MatrixXd discrete_rate_matrix(const CoupledModel& m) {
  return discrete_rates(m.omega, m.tau, m.kappa);
}
Eigen::MatrixXd discrete_rate_base(const CoupledModel& m) {
  return discrete_rates(m.omega, 0.0, 0.0);
}
Eigen::MatrixXd discrete_rate_tau_part() {
  return discrete_rates(1.0, 1.0, 0.0) - discrete_rates(1.0, 0.0, 0.0);
}
Eigen::MatrixXd discrete_rate_kappa_part() {
  return discrete_rates(1.0, 0.0, 1.0) - discrete_rates(1.0, 0.0, 0.0);
}

Eigen::MatrixXd generator_matrix(const CoupledModel& m) {
  switch (m.kind) {
    case ModelKind::Linear4D: return linear_drift(m);
    case ModelKind::Discrete9D: return discrete_rate_matrix(m);
    default:
      throw std::invalid_argument(
          "generator_matrix: ring models have no finite exact generator; use the "
          "Fourier-Galerkin solver");
  }
}

std::pair<Complex, Complex> exact_lambda_pm(const CoupledModel& m) {
  const double k = m.kappa, t = m.tau;
  if (m.kind == ModelKind::Linear4D) {
    Complex base(-m.eta - k, m.omega + t / 2.0);
    double disc = 4 * k * k - t * t;
    if (disc > 0) {
      double s = 0.5 * std::sqrt(disc);
      return {base + s, base - s};
    }
    if (disc == 0) return {base, base};
    double s = 0.5 * std::sqrt(-disc);
    return {base + Complex(0, s), base - Complex(0, s)};
  }
  if (m.kind == ModelKind::Discrete9D) {
    const double r3 = std::sqrt(3.0);
    Complex base(-1.5 * m.omega - 0.75 * t, r3 / 2.0 * m.omega + r3 / 4.0 * t);
    double disc = 4 * k * k - 3 * t * t;
    if (disc > 0) {
      Complex pref = Complex(1.0, r3) / 4.0;
      double s = std::sqrt(disc);
      return {base + pref * s, base - pref * s};
    }
    if (disc == 0) return {base, base};
    Complex pref = Complex(r3, -1.0) / 4.0;
    double s = std::sqrt(-disc);
    return {base + pref * s, base - pref * s};
  }
  throw std::invalid_argument("exact_lambda_pm: no closed form for ring models at D > 0");
}

UnperturbedEigendata unperturbed_eigendata(const CoupledModel& m) {
  UnperturbedEigendata out;
  switch (m.kind) {
    case ModelKind::Linear4D: {
      require_positive_diffusion(m, "unperturbed_eigendata");
      out.lambda1 = Complex(-m.eta, m.omega);
      const double c = std::sqrt(m.eta / (2.0 * m.diffusion));
      // Q1x = (x2 + i x1) c,  P1x poly part is (x2 - i x1) with the Gaussian
      // weight and normalization folded into the pairing rules.
      LinearForm q1x, q1y, p1x, p1y;
      q1x.coeffs << Complex(0, c), Complex(c, 0), 0, 0;
      q1y.coeffs << 0, 0, Complex(0, c), Complex(c, 0);
      // Forward partners stored through their polynomial part with the
      // Gaussian mass and second moment folded in, so that the bilinear dot
      // p1x.coeffs . q1x.coeffs equals the integral pairing (= 1 here).
      const double cp = 1.0 / (2.0 * c);
      p1x.coeffs << Complex(0, -cp), Complex(cp, 0), 0, 0;
      p1y.coeffs << 0, 0, Complex(0, -cp), Complex(cp, 0);
      out.q1x = q1x; out.q1y = q1y; out.p1x = p1x; out.p1y = p1y;
      return out;
    }
    case ModelKind::Ring2D:
    case ModelKind::RingCos2D: {
      require_positive_diffusion(m, "unperturbed_eigendata");
      out.lambda1 = Complex(-m.diffusion, m.omega);
      FourierField q1x{1, 1, VectorXcd::Zero(3)}, q1y{1, 1, VectorXcd::Zero(3)};
      q1x.z(2) = 1.0;  // mode (m,n) = (1,0), j = +1
      q1y.z(1) = 1.0;  // mode (m,n) = (0,1), j = 0
      // P_{1x} = exp(-ix) / (4 pi^2): lives on the N = -1 lattice.
      FourierField p1x{-1, 1, VectorXcd::Zero(3)}, p1y{-1, 1, VectorXcd::Zero(3)};
      p1x.z(0) = 1.0 / (4.0 * kPi * kPi);  // j = -1 -> mode (-1, 0)
      p1y.z(1) = 1.0 / (4.0 * kPi * kPi);  // j = 0  -> mode (0, -1)
      out.q1x = q1x; out.q1y = q1y; out.p1x = p1x; out.p1y = p1y;
      return out;
    }
    case ModelKind::Discrete9D: {
      const Complex w = std::polar(1.0, kTwoPi / 3.0);
      out.lambda1 = (w - 1.0) * m.omega;
      VectorXcd q(3), p(3);
      for (int i = 0; i < 3; ++i) {
        q(i) = std::pow(w, i);
        p(i) = std::conj(q(i)) / 3.0;
      }
      VectorXcd one = VectorXcd::Ones(3);
      VectorXcd unif = VectorXcd::Constant(3, 1.0 / 3.0);
      StateFunction q1x, q1y, p1x, p1y;
      q1x.values = VectorXcd(9); q1y.values = VectorXcd(9);
      p1x.values = VectorXcd(9); p1y.values = VectorXcd(9);
      for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) {
          int s = 3 * j + i;
          q1x.values(s) = q(i);             // function of the A state
          q1y.values(s) = q(j);             // function of the B state
          p1x.values(s) = p(i) * unif(j).real();
          p1y.values(s) = unif(i).real() * p(j);
        }
      out.q1x = q1x; out.q1y = q1y; out.p1x = p1x; out.p1y = p1y;
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

double quality_factor(Complex lambda1) {
  if (lambda1.real() == 0.0)
    throw std::invalid_argument("quality_factor: Re(lambda) = 0, undamped mode");
  return std::abs(lambda1.imag() / lambda1.real());
}

// ---------------------------------------------------------------------------

StationaryDensity stationary_density(const CoupledModel& m, int ring_J) {
  switch (m.kind) {
    case ModelKind::Linear4D: {
      require_positive_diffusion(m, "stationary_density");
      // Lyapunov solve A S + S A^T = -2 D I via the Kronecker system.
      Eigen::Matrix4d a = linear_drift(m);
      Eigen::Matrix<double, 16, 16> k = Eigen::Matrix<double, 16, 16>::Zero();
      Eigen::Matrix4d eye = Eigen::Matrix4d::Identity();
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          for (int p = 0; p < 4; ++p)
            for (int q = 0; q < 4; ++q)
              k(4 * i + j, 4 * p + q) = eye(i, p) * a(j, q) + a(i, p) * eye(j, q);
      Eigen::Matrix4d rhs = -2.0 * m.diffusion * eye;
      Eigen::VectorXd v = k.fullPivLu().solve(Eigen::Map<Eigen::VectorXd>(rhs.data(), 16));
      Eigen::Matrix4d cov = Eigen::Map<Eigen::Matrix4d>(v.data());
      cov = 0.5 * (cov + cov.transpose()).eval();
      return GaussianStationary{cov};
    }
    case ModelKind::Discrete9D: {
      Eigen::MatrixXd c = discrete_rate_matrix(m);
      Eigen::EigenSolver<Eigen::MatrixXd> es(c);
      int best = 0;
      for (int i = 1; i < 9; ++i)
        if (std::abs(es.eigenvalues()(i)) < std::abs(es.eigenvalues()(best))) best = i;
      if (std::abs(es.eigenvalues()(best)) > 1e-8 * m.omega)
        throw NumericalError("stationary_density: no zero eigenvalue found for rate matrix");
      VectorXd p = es.eigenvectors().col(best).real();
      double s = p.sum();
      if (std::abs(s) < 1e-12) throw NumericalError("stationary_density: degenerate kernel");
      p /= s;
      for (int i = 0; i < 9; ++i)
        if (p(i) < -1e-10) throw NumericalError("stationary_density: negative probability");
      return DiscreteStationary{p.cwiseMax(0.0)};
    }
    default:
      break;
  }
  // Ring models: kernel of the forward N = 0 block, fixed by the
  // normalization row; implemented in cf_solver.cpp next to the block builder.
  require_positive_diffusion(m, "stationary_density");
  return ring_stationary_impl(m, ring_J);
}

// ---------------------------------------------------------------------------

namespace {

// Drift field of a continuous model.
VectorXd drift_at(const CoupledModel& m, const VectorXd& z) {
  if (m.kind == ModelKind::Linear4D) return linear_drift(m) * z;
  VectorXd f(2);
  double x = z(0), y = z(1);
  double cx = (m.kind == ModelKind::Ring2D) ? std::sin(y - x) : std::cos(y - x);
  double cy = (m.kind == ModelKind::Ring2D) ? std::sin(x - y) : std::cos(x - y);
  f(0) = m.omega + m.tau + m.kappa * cx;
  f(1) = m.omega + m.kappa * cy;
  return f;
}

}  // namespace

Complex apply_backward_generator(const CoupledModel& m, const EigenfunctionDescriptor& f,
                                 const VectorXd& point, int state) {
  if (m.kind == ModelKind::Discrete9D) {
    const auto& sf = std::get<StateFunction>(f);
    if (state < 0 || state >= 9) throw std::invalid_argument("state index out of range");
    Eigen::MatrixXd c = discrete_rate_matrix(m);
    Complex acc(0, 0);
    for (int r = 0; r < 9; ++r) acc += c(r, state) * sf.values(r);  // (C^T f)(state)
    return acc;
  }
  if (m.kind == ModelKind::Linear4D) {
    const auto& lf = std::get<LinearForm>(f);
    // L+[c . z] = c . (A z); diffusion contributes nothing to linear forms.
    Vector4cd az = linear_drift(m).cast<Complex>() * point.head<4>().cast<Complex>();
    return lf.coeffs.cwiseProduct(az).sum();
  }
  // Ring models: differentiate the Fourier modes analytically.
  const auto& tm = std::get<FourierField>(f);
  double x = point(0), y = point(1);
  VectorXd fv = drift_at(m, point);
  Complex acc(0, 0);
  for (int idx = 0; idx < tm.z.size(); ++idx) {
    if (tm.z(idx) == Complex(0, 0)) continue;
    int j = idx - tm.J;
    int k = tm.N - j;
    Complex e = std::polar(1.0, j * x + k * y);
    Complex dx = Complex(0, j) * e, dy = Complex(0, k) * e;
    Complex lap = -static_cast<double>(j * j + k * k) * e;
    acc += tm.z(idx) * (fv(0) * dx + fv(1) * dy + m.diffusion * lap);
  }
  return acc;
}

Complex apply_backward_generator_fd(const CoupledModel& m,
                                    const std::function<Complex(const VectorXd&)>& f,
                                    const VectorXd& point, double h) {
  if (!m.continuous())
    throw std::invalid_argument("finite-difference generator needs a continuous model");
  if (!(h > 1e-12))
    throw std::invalid_argument("finite-difference step underflow");
  const int n = point.size();
  VectorXd fv = drift_at(m, point);
  Complex acc(0, 0);
  for (int i = 0; i < n; ++i) {
    VectorXd zp = point, zm = point, zp2 = point, zm2 = point;
    zp(i) += h; zm(i) -= h; zp2(i) += 2 * h; zm2(i) -= 2 * h;
    Complex d1 = (8.0 * (f(zp) - f(zm)) - (f(zp2) - f(zm2))) / (12.0 * h);
    Complex d2 = (-f(zp2) + 16.0 * f(zp) - 30.0 * f(point) + 16.0 * f(zm) - f(zm2)) /
                 (12.0 * h * h);
    acc += fv(i) * d1 + m.diffusion * d2;
  }
  return acc;
}

OscillatoryReport validate_robustly_oscillatory(const VectorXcd& spectrum, double upsilon) {
  OscillatoryReport rep;
  rep.upsilon = upsilon;
  double scale = 0;
  for (int i = 0; i < spectrum.size(); ++i) scale = std::max(scale, std::abs(spectrum(i)));
  if (scale == 0) return rep;
  const double zero_tol = 1e-9 * scale;
  rep.stable = true;
  std::vector<Complex> osc;
  for (int i = 0; i < spectrum.size(); ++i) {
    Complex z = spectrum(i);
    if (std::abs(z) <= zero_tol) continue;
    if (z.real() >= 0) rep.stable = false;
    if (z.imag() > zero_tol) osc.push_back(z);
  }
  if (osc.empty()) return rep;
  std::sort(osc.begin(), osc.end(), [](Complex a, Complex b) { return a.real() > b.real(); });
  Complex lead = osc.front();
  rep.quality = std::abs(lead.imag() / lead.real());
  rep.quality_large = rep.quality > 1.0;
  // unique: no second eigenvalue with (numerically) the same real part
  rep.unique_leading = osc.size() < 2 || (osc[1].real() < lead.real() - 1e-9 * scale);
  if (osc.size() >= 2) {
    rep.gap_ratio = osc[1].real() / lead.real();
    rep.gap_ok = rep.gap_ratio > upsilon;
  }
  return rep;
}

}  // namespace qsync
