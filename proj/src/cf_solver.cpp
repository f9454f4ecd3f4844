#include "qsync/cf_solver.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "qsync/rng.hpp"

namespace qsync {

namespace {

void require_ring(const CoupledModel& m, const char* op) {
  if (!m.is_ring()) {
    std::ostringstream os;
    os << op << ": expects a ring model, got " << model_kind_name(m.kind);
    throw std::invalid_argument(os.str());
  }
  if (!(m.diffusion > 0)) {
    std::ostringstream os;
    os << op << ": ring solver requires D > 0";
    throw std::invalid_argument(os.str());
  }
}

// Recurrence coefficients for arbitrary row index n (the infinite system,
// not truncated): sub couples to n-1, super to n+1.
Complex coef_diag(const CoupledModel& m, int N, long n) {
  return Complex(-m.diffusion * (double(n) * n + double(N - n) * (N - n)),
                 (m.omega + m.tau) * n + m.omega * (N - n));
}
Complex coef_sub(const CoupledModel& m, int N, long n) {
  if (m.kind == ModelKind::RingCos2D) return Complex(0, m.kappa / 2.0 * N);
  return Complex(m.kappa / 2.0 * (N - 2.0 * (n - 1)), 0);
}
Complex coef_super(const CoupledModel& m, int N, long n) {
  if (m.kind == ModelKind::RingCos2D) return Complex(0, m.kappa / 2.0 * N);
  return Complex(m.kappa / 2.0 * (2.0 * (n + 1) - N), 0);
}

// Tridiagonal solve with partial pivoting (fill-in limited to one extra
// superdiagonal).  Exactly singular pivots are floored relative to the block
// scale, which keeps inverse iteration finite on resonant diagonals.
VectorXcd tridiag_solve(VectorXcd a, VectorXcd b, VectorXcd c, VectorXcd r) {
  const int n = static_cast<int>(b.size());
  double scale = 0;
  for (int i = 0; i < n; ++i)
    scale = std::max({scale, std::abs(a(i)), std::abs(b(i)), std::abs(c(i))});
  const Complex tiny(std::max(scale, 1.0) * 1e-40, 0);
  VectorXcd d = VectorXcd::Zero(n);  // second superdiagonal fill
  for (int i = 0; i + 1 < n; ++i) {
    if (std::abs(a(i + 1)) > std::abs(b(i))) {
      std::swap(b(i), a(i + 1));  // after this, a(i+1) holds the sub-pivot entry
      Complex tc = c(i);
      c(i) = b(i + 1);
      b(i + 1) = tc;
      Complex td = d(i);
      d(i) = c(i + 1);
      c(i + 1) = td;
      std::swap(r(i), r(i + 1));
    }
    if (b(i) == Complex(0, 0)) b(i) = tiny;
    Complex mfac = a(i + 1) / b(i);
    b(i + 1) -= mfac * c(i);
    c(i + 1) -= mfac * d(i);
    r(i + 1) -= mfac * r(i);
  }
  VectorXcd x(n);
  if (b(n - 1) == Complex(0, 0)) b(n - 1) = tiny;
  x(n - 1) = r(n - 1) / b(n - 1);
  if (n >= 2) x(n - 2) = (r(n - 2) - c(n - 2) * x(n - 1)) / b(n - 2);
  for (int i = n - 3; i >= 0; --i)
    x(i) = (r(i) - c(i) * x(i + 1) - d(i) * x(i + 2)) / b(i);
  return x;
}

// Inverse iteration for the eigenvector of a tridiagonal block at a known
// eigenvalue.  `transpose` solves for a left eigenvector.
VectorXcd inverse_iteration(const TridiagonalBlock& blk, Complex lambda, bool transpose,
                            double residual_tol, uint64_t seed_salt) {
  const int n = static_cast<int>(blk.diag.size());
  VectorXcd a = blk.sub, b = blk.diag, c = blk.super;
  if (transpose) {
    // (H^T)(i, i-1) = H(i-1, i) = super(i-1) shifted
    VectorXcd at(n), ct(n);
    at.setZero();
    ct.setZero();
    for (int i = 1; i < n; ++i) at(i) = blk.super(i - 1);
    for (int i = 0; i + 1 < n; ++i) ct(i) = blk.sub(i + 1);
    a = at;
    c = ct;
  }
  b.array() -= lambda;
  double scale = 0;
  for (int i = 0; i < n; ++i)
    scale = std::max({scale, std::abs(b(i)) + std::abs(lambda), std::abs(a(i)), std::abs(c(i))});

  Rng rng(0x9d2c5680u, seed_salt);
  VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = Complex(rng.normal(), rng.normal());
  v.normalize();
  for (int it = 0; it < 4; ++it) {
    v = tridiag_solve(a, b, c, v);
    double nv = v.stableNorm();
    if (!std::isfinite(nv) || nv == 0) {
      for (int i = 0; i < n; ++i) v(i) = Complex(rng.normal(), rng.normal());
      v.normalize();
      continue;
    }
    v /= nv;
    // residual of the shifted system
    VectorXcd hv(n);
    for (int i = 0; i < n; ++i) {
      Complex acc = b(i) * v(i);
      if (i > 0) acc += a(i) * v(i - 1);
      if (i + 1 < n) acc += c(i) * v(i + 1);
      hv(i) = acc;
    }
    if (hv.norm() <= residual_tol * scale) return v;
  }
  std::ostringstream os;
  os << "inverse iteration did not converge for lambda=" << lambda << " on a " << n
     << "-dimensional tridiagonal block";
  throw NumericalError(os.str());
}

std::vector<Complex> schur_eigenvalues(const MatrixXcd& h) {
  Eigen::ComplexSchur<MatrixXcd> schur;
  schur.computeFromHessenberg(h, MatrixXcd::Identity(h.rows(), h.cols()), false);
  if (schur.info() != Eigen::Success) {
    std::ostringstream os;
    os << "Schur iteration failed on " << h.rows() << "x" << h.cols() << " block";
    throw NumericalError(os.str());
  }
  std::vector<Complex> ev(h.rows());
  for (int i = 0; i < h.rows(); ++i) ev[i] = schur.matrixT()(i, i);
  return ev;
}

RingSpectrumResult spectrum_of_block(const TridiagonalBlock& blk,
                                     const RingSpectrumOptions& opts,
                                     const TridiagonalBlock* refined) {
  RingSpectrumResult out;
  std::vector<Complex> ev = schur_eigenvalues(blk.dense());
  std::sort(ev.begin(), ev.end(), [](Complex x, Complex y) {
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });
  out.pairs.resize(ev.size());
  for (std::size_t i = 0; i < ev.size(); ++i) out.pairs[i].lambda = ev[i];

  const int nv = std::min<int>(opts.n_eigenvectors, static_cast<int>(ev.size()));
  for (int i = 0; i < nv; ++i) {
    out.pairs[i].right = inverse_iteration(blk, ev[i], false, opts.residual_tol, 2 * i);
    out.pairs[i].left = inverse_iteration(blk, ev[i], true, opts.residual_tol, 2 * i + 1);
    Complex g = out.pairs[i].left.cwiseProduct(out.pairs[i].right).sum();
    double rel = std::abs(g) / (out.pairs[i].left.norm() * out.pairs[i].right.norm());
    if (rel > 1e-10) out.pairs[i].left /= g;  // biorthonormalize where well posed
  }

  if (refined) {
    std::vector<Complex> ev2 = schur_eigenvalues(refined->dense());
    Complex lead2 = ev2.front();
    for (Complex z : ev2)
      if (z.real() > lead2.real()) lead2 = z;
    out.leading_shift = std::abs(lead2 - ev.front());
    out.convergence_warning = out.leading_shift > opts.convergence_tol;
  }
  return out;
}

}  // namespace

MatrixXcd TridiagonalBlock::dense() const {
  const int n = static_cast<int>(diag.size());
  MatrixXcd h = MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    h(i, i) = diag(i);
    if (i > 0) h(i, i - 1) = sub(i);
    if (i + 1 < n) h(i, i + 1) = super(i);
  }
  return h;
}

TridiagonalBlock backward_block(const CoupledModel& m, int N, int J) {
  require_ring(m, "backward_block");
  if (J < 1) throw std::invalid_argument("backward_block: J must be >= 1");
  TridiagonalBlock blk;
  blk.N = N;
  blk.J = J;
  const int n = 2 * J + 1;
  blk.sub.resize(n);
  blk.diag.resize(n);
  blk.super.resize(n);
  for (int idx = 0; idx < n; ++idx) {
    int j = idx - J;
    blk.diag(idx) = coef_diag(m, N, j);
    blk.sub(idx) = (idx > 0) ? coef_sub(m, N, j) : Complex(0, 0);
    blk.super(idx) = (idx + 1 < n) ? coef_super(m, N, j) : Complex(0, 0);
  }
  return blk;
}

TridiagonalBlock forward_block(const CoupledModel& m, int N, int J) {
  // Adjoint of the backward block under the plain L2 pairing on coefficients.
  TridiagonalBlock b = backward_block(m, N, J);
  TridiagonalBlock f;
  f.N = N;
  f.J = J;
  const int n = 2 * J + 1;
  f.diag = b.diag.conjugate();
  f.sub.resize(n);
  f.super.resize(n);
  f.sub.setZero();
  f.super.setZero();
  for (int i = 1; i < n; ++i) f.sub(i) = std::conj(b.super(i - 1));
  for (int i = 0; i + 1 < n; ++i) f.super(i) = std::conj(b.sub(i + 1));
  return f;
}

TridiagonalBlock backward_block_tau_part(const CoupledModel& m, int N, int J) {
  TridiagonalBlock a = backward_block(m.with(0.0, m.kappa), N, J);
  TridiagonalBlock b = backward_block(m.with(1.0, m.kappa), N, J);
  TridiagonalBlock out = a;
  out.diag = b.diag - a.diag;
  out.sub = b.sub - a.sub;
  out.super = b.super - a.super;
  return out;
}

TridiagonalBlock backward_block_kappa_part(const CoupledModel& m, int N, int J) {
  TridiagonalBlock a = backward_block(m.with(m.tau, 0.0), N, J);
  TridiagonalBlock b = backward_block(m.with(m.tau, 1.0), N, J);
  TridiagonalBlock out = a;
  out.diag = b.diag - a.diag;
  out.sub = b.sub - a.sub;
  out.super = b.super - a.super;
  return out;
}

RingSpectrumResult ring_spectrum(const CoupledModel& m, int N, int J,
                                 const RingSpectrumOptions& opts) {
  require_ring(m, "ring_spectrum");
  if (J < 4) throw std::invalid_argument("ring_spectrum: J must be >= 4");
  TridiagonalBlock blk = backward_block(m, N, J);
  if (opts.check_convergence) {
    TridiagonalBlock fine = backward_block(m, N, J + 10);
    return spectrum_of_block(blk, opts, &fine);
  }
  return spectrum_of_block(blk, opts, nullptr);
}

RingSpectrumResult ring_forward_spectrum(const CoupledModel& m, int N, int J,
                                         const RingSpectrumOptions& opts) {
  require_ring(m, "ring_forward_spectrum");
  if (J < 4) throw std::invalid_argument("ring_forward_spectrum: J must be >= 4");
  TridiagonalBlock blk = forward_block(m, N, J);
  if (opts.check_convergence) {
    TridiagonalBlock fine = forward_block(m, N, J + 10);
    return spectrum_of_block(blk, opts, &fine);
  }
  return spectrum_of_block(blk, opts, nullptr);
}

std::pair<Complex, Complex> ring_leading_pair(const CoupledModel& m, int J,
                                              const RingSpectrumOptions& opts) {
  RingSpectrumOptions o = opts;
  o.n_eigenvectors = 0;
  RingSpectrumResult r = ring_spectrum(m, 1, J, o);
  return {r.pairs[0].lambda, r.pairs[1].lambda};
}

// ---------------------------------------------------------------------------
// Continued fractions.

namespace {

// M-th approximant of  b0 + a1/(b1 + a2/(b2 + ...)), terms supplied lazily.
template <typename TermFn>
Complex cf_approximant(int order, TermFn terms, bool* ok) {
  Complex am1(1, 0), a0(0, 0);  // A_{-1}, A_0 (b0 = 0 for our fractions)
  Complex bm1(0, 0), b0(1, 0);  // B_{-1}, B_0
  for (int mth = 1; mth <= order; ++mth) {
    auto [a, b] = terms(mth);
    Complex an = b * a0 + a * am1;
    Complex bn = b * b0 + a * bm1;
    double s = std::max({std::abs(an), std::abs(bn), 1.0});
    am1 = a0 / s;
    bm1 = b0 / s;
    a0 = an / s;
    b0 = bn / s;
  }
  if (!(std::abs(b0) > 0) || !std::isfinite(std::abs(a0)) || !std::isfinite(std::abs(b0))) {
    *ok = false;
    return Complex(0, 0);
  }
  *ok = true;
  return a0 / b0;
}

}  // namespace

CfField cf_eigenfunction(const CoupledModel& m, Complex lambda, int N, int J, int M,
                         double residual_tol) {
  require_ring(m, "cf_eigenfunction");
  TridiagonalBlock blk = backward_block(m, N, J);
  const int n = 2 * J + 1;

  // Dense (inverse-iteration) eigenvector: anchors the ratio chain, checks
  // residual post-hoc, and serves as the fallback.
  VectorXcd dense = inverse_iteration(blk, lambda, false, 1e-6, 0xcf);

  CfField out;
  out.M = M;
  out.field.N = N;
  out.field.J = J;
  out.field.z = VectorXcd::Zero(n);

  int anchor = 0;  // coefficient index j = 0
  if (std::abs(dense(J)) < 1e-8 * dense.cwiseAbs().maxCoeff()) {
    int bestIdx = 0;
    double bestMag = -1;
    for (int idx = 0; idx < n; ++idx) {
      double mag = std::abs(dense(idx));
      int absj = std::abs(idx - J);
      if (mag > bestMag * (1 + 1e-12) ||
          (std::abs(mag - bestMag) <= 1e-12 * bestMag && absj < std::abs(bestIdx - J))) {
        bestMag = mag;
        bestIdx = idx;
      }
    }
    anchor = bestIdx - J;
  }

  auto qm = [&](long nn) { return coef_sub(m, N, nn); };
  auto q0 = [&](long nn) { return coef_diag(m, N, nn) - lambda; };
  auto qp = [&](long nn) { return coef_super(m, N, nn); };

  bool ok = true;
  out.field.z(anchor + J) = 1.0;
  // upward ratios S_j = c_{j+1}/c_j
  for (int j = anchor; j < J && ok; ++j) {
    bool fine = true;
    Complex s = cf_approximant(
        M,
        [&](int mth) -> std::pair<Complex, Complex> {
          if (mth == 1) return {-qm(j + 1), q0(j + 1)};
          return {-qp(j + mth - 1) * qm(j + mth), q0(j + mth)};
        },
        &fine);
    ok = ok && fine;
    if (ok) out.field.z(j + 1 + J) = s * out.field.z(j + J);
  }
  // downward ratios T_j = c_{j-1}/c_j
  for (int j = anchor; j > -J && ok; --j) {
    bool fine = true;
    Complex t = cf_approximant(
        M,
        [&](int mth) -> std::pair<Complex, Complex> {
          if (mth == 1) return {-qp(j - 1), q0(j - 1)};
          return {-qm(j - mth + 1) * qp(j - mth), q0(j - mth)};
        },
        &fine);
    ok = ok && fine;
    if (ok) out.field.z(j - 1 + J) = t * out.field.z(j + J);
  }

  if (ok) {
    double nz = out.field.z.norm();
    ok = std::isfinite(nz) && nz > 0;
    if (ok) out.field.z /= nz;
  }
  if (ok) {
    // relative recurrence residual
    VectorXcd hv(n);
    double scale = 0;
    for (int i = 0; i < n; ++i) {
      Complex acc = (blk.diag(i) - lambda) * out.field.z(i);
      if (i > 0) acc += blk.sub(i) * out.field.z(i - 1);
      if (i + 1 < n) acc += blk.super(i) * out.field.z(i + 1);
      hv(i) = acc;
      scale = std::max(scale, std::abs(blk.diag(i) - lambda));
    }
    out.residual = hv.norm() / std::max(scale, 1.0);
    ok = out.residual <= residual_tol;
  }

  if (!ok) {
    out.fallback = true;
    out.field.z = dense / dense.norm();
    VectorXcd hv(n);
    double scale = 0;
    for (int i = 0; i < n; ++i) {
      Complex acc = (blk.diag(i) - lambda) * out.field.z(i);
      if (i > 0) acc += blk.sub(i) * out.field.z(i - 1);
      if (i + 1 < n) acc += blk.super(i) * out.field.z(i + 1);
      hv(i) = acc;
      scale = std::max(scale, std::abs(blk.diag(i) - lambda));
    }
    out.residual = hv.norm() / std::max(scale, 1.0);
  }
  return out;
}

RingStationary ring_stationary_impl(const CoupledModel& m, int J) {
  require_ring(m, "ring_stationary");
  TridiagonalBlock f = forward_block(m, 0, J);
  const int n = 2 * J + 1;
  MatrixXcd sys(n + 1, n);
  sys.topRows(n) = f.dense();
  sys.row(n).setZero();
  sys(n, J) = 1.0;  // pins c_{0,0}
  VectorXcd rhs = VectorXcd::Zero(n + 1);
  rhs(n) = 1.0 / (4.0 * kPi * kPi);  // so the density integrates to one
  VectorXcd z = sys.colPivHouseholderQr().solve(rhs);
  double res = (f.dense() * z).norm();
  if (res > 1e-8 * std::max(1.0, f.diag.cwiseAbs().maxCoeff()))
    throw NumericalError("ring_stationary: kernel solve residual out of tolerance");
  RingStationary out;
  out.field.N = 0;
  out.field.J = J;
  out.field.z = z;
  return out;
}

}  // namespace qsync
