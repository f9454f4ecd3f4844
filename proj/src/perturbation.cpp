#include "qsync/perturbation.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "qsync/cf_solver.hpp"

namespace qsync {

namespace {

Complex bilinear4(const Vector4cd& a, const Vector4cd& b) { return a.cwiseProduct(b).sum(); }

// Mode algebra on the torus: sparse map (j,k) -> coefficient.
using ModeMap = std::map<std::pair<int, int>, Complex>;

ModeMap apply_tau_backward(const ModeMap& f) {
  ModeMap out;
  for (const auto& [jk, c] : f) out[jk] += Complex(0, jk.first) * c;
  return out;
}

ModeMap apply_kappa_backward(const ModeMap& f, bool cos_coupling) {
  ModeMap out;
  for (const auto& [jk, c] : f) {
    auto [j, k] = jk;
    if (cos_coupling) {
      Complex w = Complex(0, 0.5 * (j + k)) * c;
      out[{j - 1, k + 1}] += w;
      out[{j + 1, k - 1}] += w;
    } else {
      out[{j - 1, k + 1}] += 0.5 * (j - k) * c;
      out[{j + 1, k - 1}] += 0.5 * (k - j) * c;
    }
  }
  return out;
}

Complex mode_coeff(const ModeMap& f, int j, int k) {
  auto it = f.find({j, k});
  return it == f.end() ? Complex(0, 0) : it->second;
}

// Published first-order matrix of the discrete model (a similarity transform
// of the natural pairing basis; identical trace, determinant, eigenvalues).
void discrete_published_parts(Eigen::Matrix2cd& m_tau, Eigen::Matrix2cd& m_kappa) {
  const double r3 = std::sqrt(3.0);
  m_kappa << Complex(0.5, r3 / 2.0), Complex(1.5, 0.0),
             Complex(0.0, 0.0), Complex(-0.5, -r3 / 2.0);
  m_tau << Complex(-3.0 / 8.0, 5.0 * r3 / 8.0), Complex(21.0 / 16.0, 0.0),
           Complex(0.5, -r3 / 2.0), Complex(-9.0 / 8.0, -r3 / 8.0);
}

}  // namespace

MMatrix build_m_matrix(const CoupledModel& m) {
  MMatrix out;
  out.kind = m.kind;
  out.kappa = m.kappa;
  out.tau = m.tau;

  switch (m.kind) {
    case ModelKind::Linear4D: {
      auto ed = unperturbed_eigendata(m);
      const Vector4cd q1x = std::get<LinearForm>(ed.q1x).coeffs;
      const Vector4cd q1y = std::get<LinearForm>(ed.q1y).coeffs;
      const Vector4cd p1x = std::get<LinearForm>(ed.p1x).coeffs;
      const Vector4cd p1y = std::get<LinearForm>(ed.p1y).coeffs;
      Eigen::Matrix4cd at = linear_drift_tau_part().cast<Complex>().transpose();
      Eigen::Matrix4cd ak = linear_drift_kappa_part().cast<Complex>().transpose();
      out.a1 = bilinear4(p1x, at * q1x);
      out.b1 = bilinear4(p1x, at * q1y);
      out.c1 = bilinear4(p1y, at * q1x);
      out.d1 = bilinear4(p1y, at * q1y);
      out.alpha = bilinear4(p1x, ak * q1x);
      out.beta = bilinear4(p1x, ak * q1y);
      out.m_tau << out.a1, out.b1, out.c1, out.d1;
      out.m_kappa << out.alpha, out.beta, bilinear4(p1y, ak * q1x), bilinear4(p1y, ak * q1y);
      break;
    }
    case ModelKind::Ring2D:
    case ModelKind::RingCos2D: {
      const bool cosc = m.kind == ModelKind::RingCos2D;
      ModeMap q1x{{{1, 0}, 1.0}}, q1y{{{0, 1}, 1.0}};
      auto pair_x = [](const ModeMap& f) { return mode_coeff(f, 1, 0); };
      auto pair_y = [](const ModeMap& f) { return mode_coeff(f, 0, 1); };
      ModeMap tx = apply_tau_backward(q1x), ty = apply_tau_backward(q1y);
      ModeMap kx = apply_kappa_backward(q1x, cosc), ky = apply_kappa_backward(q1y, cosc);
      out.a1 = pair_x(tx);
      out.b1 = pair_x(ty);
      out.c1 = pair_y(tx);
      out.d1 = pair_y(ty);
      out.alpha = pair_x(kx);
      out.beta = pair_x(ky);
      out.m_tau << out.a1, out.b1, out.c1, out.d1;
      out.m_kappa << out.alpha, out.beta, pair_y(kx), pair_y(ky);
      break;
    }
    case ModelKind::Discrete9D: {
      auto ed = unperturbed_eigendata(m);
      const VectorXcd& q1x = std::get<StateFunction>(ed.q1x).values;
      const VectorXcd& q1y = std::get<StateFunction>(ed.q1y).values;
      const VectorXcd& p1x = std::get<StateFunction>(ed.p1x).values;
      const VectorXcd& p1y = std::get<StateFunction>(ed.p1y).values;
      MatrixXcd tt = discrete_rate_tau_part().transpose().cast<Complex>();
      MatrixXcd kk = discrete_rate_kappa_part().transpose().cast<Complex>();
      auto pairing = [](const VectorXcd& p, const VectorXcd& f) {
        return p.cwiseProduct(f).sum();
      };
      out.m_tau_natural << pairing(p1x, tt * q1x), pairing(p1x, tt * q1y),
          pairing(p1y, tt * q1x), pairing(p1y, tt * q1y);
      out.m_kappa_natural << pairing(p1x, kk * q1x), pairing(p1x, kk * q1y),
          pairing(p1y, kk * q1x), pairing(p1y, kk * q1y);
      out.a1 = out.m_tau_natural(0, 0);
      out.b1 = out.m_tau_natural(0, 1);
      out.c1 = out.m_tau_natural(1, 0);
      out.d1 = out.m_tau_natural(1, 1);
      out.alpha = out.m_kappa_natural(0, 0);
      out.beta = out.m_kappa_natural(0, 1);
      discrete_published_parts(out.m_tau, out.m_kappa);
      out.entries = m.tau * out.m_tau + m.kappa * out.m_kappa;
      return out;
    }
  }
  out.m_tau_natural = out.m_tau;
  out.m_kappa_natural = out.m_kappa;
  out.entries = m.tau * out.m_tau + m.kappa * out.m_kappa;
  return out;
}

const char* split_regime_name(SplitRegime r) {
  switch (r) {
    case SplitRegime::SplitRealParts: return "split_real_parts";
    case SplitRegime::Coalesced: return "coalesced";
    case SplitRegime::SplitImagParts: return "split_imag_parts";
    case SplitRegime::MixedSplit: return "mixed_split";
    case SplitRegime::NoSplit: return "no_split";
  }
  return "?";
}

namespace {

// principal square root: Re >= 0, and Im >= 0 on the branch cut
Complex principal_sqrt(Complex z) {
  Complex s = std::sqrt(z);
  if (s.real() < 0 || (s.real() == 0 && s.imag() < 0)) s = -s;
  return s;
}

Vector2cd null_vector_2x2(const Eigen::Matrix2cd& a) {
  // Right null vector of a (assumed rank deficient); choose the better
  // conditioned of the two analytic forms.
  Vector2cd v1(a(0, 1), -a(0, 0));
  Vector2cd v2(a(1, 1), -a(1, 0));
  Vector2cd v = (v1.norm() >= v2.norm()) ? v1 : v2;
  if (v.norm() == 0) v = Vector2cd(1, 0);
  v.normalize();
  // deterministic phase: largest component real positive
  int i = std::abs(v(0)) >= std::abs(v(1)) ? 0 : 1;
  v *= std::polar(1.0, -std::arg(v(i)));
  return v;
}

}  // namespace

SplittingReport splitting_report(const MMatrix& m, double regime_tol) {
  SplittingReport rep;
  const Eigen::Matrix2cd& a = m.entries;
  const double scale = std::max(a.norm(), 1e-300);
  Complex tr = a(0, 0) + a(1, 1);
  Complex det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  rep.upsilon = tr / 2.0;
  rep.discriminant = principal_sqrt(tr * tr - 4.0 * det);
  rep.lambda_c_plus = rep.upsilon + rep.discriminant / 2.0;
  rep.lambda_c_minus = rep.upsilon - rep.discriminant / 2.0;

  const Eigen::Matrix2cd nat = m.natural();
  const bool scalar = std::abs(nat(0, 1)) <= regime_tol * scale &&
                      std::abs(nat(1, 0)) <= regime_tol * scale &&
                      std::abs(nat(0, 0) - nat(1, 1)) <= regime_tol * scale;
  if (scalar) {
    rep.regime = SplitRegime::NoSplit;
    rep.v_plus = Vector2cd(1, 0);
    rep.v_minus = Vector2cd(0, 1);
    return rep;
  }
  if (std::abs(rep.discriminant) <= regime_tol * scale) {
    rep.regime = SplitRegime::Coalesced;
    rep.defective = true;  // repeated eigenvalue without a scalar matrix
    Vector2cd v = null_vector_2x2(nat - rep.lambda_c_plus * Eigen::Matrix2cd::Identity());
    rep.v_plus = rep.v_minus = v;
    return rep;
  }
  if (std::abs(rep.discriminant.imag()) <= regime_tol * std::abs(rep.discriminant))
    rep.regime = SplitRegime::SplitRealParts;
  else if (std::abs(rep.discriminant.real()) <= regime_tol * std::abs(rep.discriminant))
    rep.regime = SplitRegime::SplitImagParts;
  else
    rep.regime = SplitRegime::MixedSplit;

  rep.v_plus = null_vector_2x2(nat - rep.lambda_c_plus * Eigen::Matrix2cd::Identity());
  rep.v_minus = null_vector_2x2(nat - rep.lambda_c_minus * Eigen::Matrix2cd::Identity());
  return rep;
}

std::optional<double> kt_boundary(const CoupledModel& family, double tau_star) {
  MMatrix mm = build_m_matrix(family.with(0.0, 0.0));
  const Eigen::Matrix2cd& mt = mm.m_tau;
  const Eigen::Matrix2cd& mk = mm.m_kappa;
  const double pairing_scale =
      std::max({std::abs(mm.a1), std::abs(mm.d1), std::abs(mm.alpha), std::abs(mm.beta), 1e-300});
  if (std::abs(mm.beta) <= 1e-12 * pairing_scale)
    throw std::invalid_argument("kt_boundary: beta = 0, no-splitting regime; KT boundary undefined");

  // D^2(kappa; tau*) = A kappa^2 + B kappa + C with complex coefficients.
  Complex trt = mt(0, 0) + mt(1, 1), trk = mk(0, 0) + mk(1, 1);
  Complex dett = mt(0, 0) * mt(1, 1) - mt(0, 1) * mt(1, 0);
  Complex detk = mk(0, 0) * mk(1, 1) - mk(0, 1) * mk(1, 0);
  Complex mix = mt(0, 0) * mk(1, 1) + mk(0, 0) * mt(1, 1) - mt(0, 1) * mk(1, 0) -
                mk(0, 1) * mt(1, 0);
  const double t = tau_star;
  Complex qa = trk * trk - 4.0 * detk;
  Complex qb = 2.0 * t * trt * trk - 4.0 * t * mix;
  Complex qc = t * t * (trt * trt - 4.0 * dett);
  if (std::abs(qa) <= 1e-14 * pairing_scale * pairing_scale)
    throw std::invalid_argument("kt_boundary: discriminant is kappa-independent; KT boundary undefined");

  Complex s = std::sqrt(qb * qb - 4.0 * qa * qc);
  Complex roots[2] = {(-qb + s) / (2.0 * qa), (-qb - s) / (2.0 * qa)};
  std::optional<double> best;
  for (Complex r : roots) {
    if (std::abs(r.imag()) > 1e-9 * (1.0 + std::abs(r))) continue;
    double k = r.real();
    if (k < -1e-12) continue;
    k = std::max(k, 0.0);
    if (!best || k < *best) best = k;
  }
  if (!best) return std::nullopt;

  // Verify D actually vanishes there.  The comparison is made on D^2: near a
  // root the square root amplifies the rounding of the quadratic evaluation
  // to ~sqrt(eps), so |D| itself cannot be pushed below that floor when the
  // root is irrational.
  double kstar = *best;
  Complex d2 = qa * kstar * kstar + qb * kstar + qc;
  double tol_d = 1e-10 * (std::abs(kstar) + std::abs(tau_star)) * std::max(1.0, pairing_scale);
  double round_floor = 64.0 * std::numeric_limits<double>::epsilon() *
                       (std::abs(qa) * kstar * kstar + std::abs(qb) * kstar + std::abs(qc));
  if (kstar != 0.0 || tau_star != 0.0) {
    if (std::abs(d2) > std::max(tol_d * tol_d, round_floor)) {
      std::ostringstream os;
      os << "kt_boundary: |D| = " << std::sqrt(std::abs(d2)) << " at kappa* = " << kstar
         << ", tau* = " << tau_star;
      throw NumericalError(os.str());
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

double GaussianCovarianceCorrection::eval(const VectorXd& z) const {
  Eigen::Matrix4d inv = sigma0.inverse();
  double det = sigma0.determinant();
  double p0 = std::exp(-0.5 * z.dot(inv * z)) / (std::pow(kTwoPi, 2.0) * std::sqrt(det));
  Eigen::Matrix4d w = inv * sigma1 * inv;
  return p0 * 0.5 * (z.dot(w * z) - (inv * sigma1).trace());
}

namespace {

// Least-squares solve of [op; rows] u = [rhs; 0] with residual verification.
VectorXcd bordered_solve(const MatrixXcd& op, const VectorXcd& rhs,
                         const std::vector<VectorXcd>& rows, double residual_tol,
                         double constraint_tol, const char* what) {
  const int n = static_cast<int>(op.cols());
  const int k = static_cast<int>(rows.size());
  MatrixXcd sys(op.rows() + k, n);
  sys.topRows(op.rows()) = op;
  for (int i = 0; i < k; ++i) sys.row(op.rows() + i) = rows[i].transpose();
  VectorXcd full = VectorXcd::Zero(op.rows() + k);
  full.head(op.rows()) = rhs;
  VectorXcd u = sys.colPivHouseholderQr().solve(full);

  // absolute floor: a rhs assembled by cancellation carries rounding noise of
  // the operand magnitudes even when it is analytically zero
  const double scale =
      std::max({rhs.norm(), op.norm() * u.norm(), 1e-5 * op.norm(), 1e-300});
  double res = (op * u - rhs).norm();
  if (res > residual_tol * scale) {
    std::ostringstream os;
    os << what << ": bordered solve residual " << res << " exceeds " << residual_tol * scale;
    throw NumericalError(os.str());
  }
  for (int i = 0; i < k; ++i) {
    double c = std::abs(rows[i].cwiseProduct(u).sum());
    if (c > constraint_tol * std::max(1.0, rows[i].norm() * u.norm())) {
      std::ostringstream os;
      os << what << ": constraint " << i << " violated (" << c << ")";
      throw NumericalError(os.str());
    }
  }
  return u;
}

}  // namespace

StationaryCorrection stationary_correction(const CoupledModel& m, int ring_J) {
  switch (m.kind) {
    case ModelKind::Linear4D: {
      if (!(m.diffusion > 0))
        throw std::invalid_argument("stationary_correction: Linear4D requires D > 0");
      GaussianCovarianceCorrection c;
      c.sigma0 = (m.diffusion / m.eta) * Eigen::Matrix4d::Identity();
      // Lyapunov first order: A0 S1 + S1 A0^T = -kappa (Ak S0 + S0 Ak^T);
      // the detuning part is antisymmetric and drops out.
      c.sigma1 = (m.kappa * m.diffusion / (m.eta * m.eta)) * linear_drift_kappa_part();
      return c;
    }
    case ModelKind::Ring2D:
    case ModelKind::RingCos2D: {
      CoupledModel base = m.with(0.0, 0.0);
      MatrixXcd f0 = forward_block(base, 0, ring_J).dense();
      MatrixXcd ft = forward_block(base.with(1.0, 0.0), 0, ring_J).dense() - f0;
      MatrixXcd fk = forward_block(base.with(0.0, 1.0), 0, ring_J).dense() - f0;
      const int n = 2 * ring_J + 1;
      VectorXcd p0 = VectorXcd::Zero(n);
      p0(ring_J) = 1.0 / (4.0 * kPi * kPi);
      VectorXcd rhs = -(m.tau * ft + m.kappa * fk) * p0;
      // Fredholm: the adjoint kernel of the unperturbed forward operator is
      // the constant observable; its pairing with the rhs is the j = 0 entry.
      if (std::abs(rhs(ring_J)) > 1e-8 * std::max(1.0, rhs.norm()))
        throw NumericalError(
            "stationary_correction: rhs not orthogonal to the constant observable");
      std::vector<VectorXcd> rows{VectorXcd::Zero(n)};
      rows[0](ring_J) = 1.0;
      VectorXcd z =
          bordered_solve(f0, rhs, rows, 1e-8, 1e-10, "stationary_correction(ring)");
      FourierField out;
      out.N = 0;
      out.J = ring_J;
      out.z = z;
      return out;
    }
    case ModelKind::Discrete9D: {
      MatrixXcd c0 = discrete_rate_base(m).cast<Complex>();
      MatrixXcd tt = discrete_rate_tau_part().cast<Complex>();
      MatrixXcd kk = discrete_rate_kappa_part().cast<Complex>();
      VectorXcd p0 = VectorXcd::Constant(9, 1.0 / 9.0);
      VectorXcd rhs = -(m.tau * tt + m.kappa * kk) * p0;
      std::vector<VectorXcd> rows{VectorXcd::Ones(9)};
      VectorXcd z = bordered_solve(c0, rhs, rows, 1e-10, 1e-10,
                                   "stationary_correction(discrete9)");
      VectorXd out(9);
      for (int i = 0; i < 9; ++i) {
        if (std::abs(z(i).imag()) > 1e-10)
          throw NumericalError("stationary_correction: discrete correction not real");
        out(i) = z(i).real();
      }
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

double eval_stationary_correction(const StationaryCorrection& c, const VectorXd& point,
                                  int state) {
  if (std::holds_alternative<GaussianCovarianceCorrection>(c))
    return std::get<GaussianCovarianceCorrection>(c).eval(point);
  if (std::holds_alternative<FourierField>(c)) {
    Complex v = std::get<FourierField>(c).eval(point(0), point(1));
    return v.real();
  }
  const VectorXd& v = std::get<VectorXd>(c);
  if (state < 0 || state >= v.size())
    throw std::invalid_argument("eval_stationary_correction: bad state index");
  return v(state);
}

// ---------------------------------------------------------------------------

EigfnCorrection eigfn_correction(const CoupledModel& m, Branch branch, int ring_J) {
  MMatrix mm = build_m_matrix(m);
  SplittingReport rep = splitting_report(mm);
  if (rep.defective)
    throw NumericalError(
        "eigfn_correction: first-order eigenvalue is repeated with a defective M (KT point); "
        "corrected eigenfunctions are not defined at this order");

  EigfnCorrection out;
  out.lambda_c = (branch == Branch::Plus) ? rep.lambda_c_plus : rep.lambda_c_minus;
  out.v = (branch == Branch::Plus) ? rep.v_plus : rep.v_minus;

  auto ed = unperturbed_eigendata(m);
  const Complex lam1 = ed.lambda1;
  const char* what = "eigfn_correction";

  auto fredholm_check = [&](const VectorXcd& row, const VectorXcd& rhs, const char* name) {
    double c = std::abs(row.cwiseProduct(rhs).sum());
    if (c > 1e-8 * std::max(1.0, row.norm() * rhs.norm())) {
      std::ostringstream os;
      os << what << ": Fredholm solvability violated, rhs not orthogonal to " << name << " ("
         << c << ")";
      throw NumericalError(os.str());
    }
  };

  switch (m.kind) {
    case ModelKind::Linear4D: {
      const Vector4cd q1x = std::get<LinearForm>(ed.q1x).coeffs;
      const Vector4cd q1y = std::get<LinearForm>(ed.q1y).coeffs;
      Vector4cd c0 = out.v(0) * q1x + out.v(1) * q1y;
      Eigen::Matrix4cd a0t = linear_drift_base(m).transpose().cast<Complex>();
      Eigen::Matrix4cd pert =
          (m.tau * linear_drift_tau_part() + m.kappa * linear_drift_kappa_part())
              .transpose()
              .cast<Complex>();
      MatrixXcd op = a0t - lam1 * Eigen::Matrix4cd::Identity();
      VectorXcd rhs = -(pert * c0 - out.lambda_c * c0);
      std::vector<VectorXcd> rows{std::get<LinearForm>(ed.p1x).coeffs,
                                  std::get<LinearForm>(ed.p1y).coeffs};
      fredholm_check(rows[0], rhs, "P_1x");
      fredholm_check(rows[1], rhs, "P_1y");
      VectorXcd u = bordered_solve(op, rhs, rows, 1e-8, 1e-10, what);
      out.residual = (op * u - rhs).norm() / std::max(1.0, rhs.norm());
      out.zeroth = LinearForm{c0};
      out.correction = LinearForm{Vector4cd(u)};
      return out;
    }
    case ModelKind::Ring2D:
    case ModelKind::RingCos2D: {
      CoupledModel base = m.with(0.0, 0.0);
      const int n = 2 * ring_J + 1;
      MatrixXcd h0 = backward_block(base, 1, ring_J).dense();
      MatrixXcd ht = backward_block(base.with(1.0, 0.0), 1, ring_J).dense() - h0;
      MatrixXcd hk = backward_block(base.with(0.0, 1.0), 1, ring_J).dense() - h0;
      VectorXcd c0 = VectorXcd::Zero(n);
      c0(ring_J + 1) = out.v(0);  // mode (1,0)
      c0(ring_J) = out.v(1);      // mode (0,1)
      MatrixXcd op = h0 - lam1 * MatrixXcd::Identity(n, n);
      VectorXcd rhs = -((m.tau * ht + m.kappa * hk) * c0 - out.lambda_c * c0);
      std::vector<VectorXcd> rows{VectorXcd::Zero(n), VectorXcd::Zero(n)};
      rows[0](ring_J + 1) = 1.0;
      rows[1](ring_J) = 1.0;
      fredholm_check(rows[0], rhs, "P_1x");
      fredholm_check(rows[1], rhs, "P_1y");
      VectorXcd u = bordered_solve(op, rhs, rows, 1e-8, 1e-10, what);
      out.residual = (op * u - rhs).norm() / std::max(1.0, rhs.norm());
      FourierField fz{1, ring_J, c0}, fu{1, ring_J, u};
      out.zeroth = fz;
      out.correction = fu;
      return out;
    }
    case ModelKind::Discrete9D: {
      const VectorXcd& q1x = std::get<StateFunction>(ed.q1x).values;
      const VectorXcd& q1y = std::get<StateFunction>(ed.q1y).values;
      VectorXcd c0 = out.v(0) * q1x + out.v(1) * q1y;
      MatrixXcd op = discrete_rate_base(m).transpose().cast<Complex>() -
                     lam1 * MatrixXcd::Identity(9, 9);
      MatrixXcd pert = (m.tau * discrete_rate_tau_part() + m.kappa * discrete_rate_kappa_part())
                           .transpose()
                           .cast<Complex>();
      VectorXcd rhs = -(pert * c0 - out.lambda_c * c0);
      std::vector<VectorXcd> rows{std::get<StateFunction>(ed.p1x).values,
                                  std::get<StateFunction>(ed.p1y).values};
      fredholm_check(rows[0], rhs, "P_1x");
      fredholm_check(rows[1], rhs, "P_1y");
      VectorXcd u = bordered_solve(op, rhs, rows, 1e-8, 1e-10, what);
      out.residual = (op * u - rhs).norm() / std::max(1.0, rhs.norm());
      out.zeroth = StateFunction{c0};
      out.correction = StateFunction{u};
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

EigenfunctionDescriptor assemble_first_order(const EigfnCorrection& c, double eps) {
  if (std::holds_alternative<LinearForm>(c.zeroth)) {
    Vector4cd v = std::get<LinearForm>(c.zeroth).coeffs +
                  eps * std::get<LinearForm>(c.correction).coeffs;
    return LinearForm{v};
  }
  if (std::holds_alternative<FourierField>(c.zeroth)) {
    FourierField f = std::get<FourierField>(c.zeroth);
    f.z += eps * std::get<FourierField>(c.correction).z;
    return f;
  }
  StateFunction s = std::get<StateFunction>(c.zeroth);
  s.values += eps * std::get<StateFunction>(c.correction).values;
  return s;
}

}  // namespace qsync
