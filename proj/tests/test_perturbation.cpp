#include <doctest.h>

#include "oracles.hpp"
#include "qsync/cf_solver.hpp"
#include "qsync/perturbation.hpp"
#include "qsync/spectral.hpp"

using namespace qsync;
using qsync::testing::loglog_slope;

namespace {

Eigen::Matrix2cd published_m(const CoupledModel& m) {
  const double k = m.kappa, t = m.tau, r3 = std::sqrt(3.0);
  Eigen::Matrix2cd out;
  switch (m.kind) {
    case ModelKind::Linear4D:
      out << Complex(-k, t), Complex(k, 0), Complex(k, 0), Complex(-k, 0);
      return out;
    case ModelKind::Ring2D:
      out << Complex(0, t), Complex(k / 2, 0), Complex(k / 2, 0), Complex(0, 0);
      return out;
    case ModelKind::RingCos2D:
      out << Complex(0, t), Complex(0, k / 2), Complex(0, k / 2), Complex(0, 0);
      return out;
    case ModelKind::Discrete9D:
      out << k * Complex(0.5, r3 / 2) + t * Complex(-3.0 / 8, 5 * r3 / 8),
          Complex(1.5 * k + 21.0 / 16 * t, 0), t * Complex(0.5, -r3 / 2),
          -k * Complex(0.5, r3 / 2) - t * Complex(9.0 / 8, r3 / 8);
      return out;
  }
  return out;
}

}  // namespace

TEST_SUITE("perturbation") {

TEST_CASE("first-order matrix reproduces the published form, all four kinds") {
  std::vector<CoupledModel> models{
      CoupledModel::linear4d(0.1, 2.0, 0.37, 0.21, 0.1),
      CoupledModel::ring(2.0, 0.37, 0.21, 0.1),
      CoupledModel::ring_cos(2.0, 0.37, 0.21, 0.1),
      CoupledModel::discrete9(2.0, 0.37, 0.21),
  };
  for (const auto& m : models) {
    MMatrix mm = build_m_matrix(m);
    CHECK((mm.entries - published_m(m)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("pairing-basis matrix is a similarity transform of the published one") {
  // Same trace and determinant, hence identical first-order eigenvalues.
  CoupledModel m = CoupledModel::discrete9(2.0, 0.45, 0.3);
  MMatrix mm = build_m_matrix(m);
  Eigen::Matrix2cd nat = mm.natural(), pub = mm.entries;
  CHECK(std::abs(nat.trace() - pub.trace()) < 1e-12);
  CHECK(std::abs(nat.determinant() - pub.determinant()) < 1e-12);
}

TEST_CASE("SDE-form models have b1 = c1 = 0 and symmetric coupling pairings") {
  std::vector<CoupledModel> models{
      CoupledModel::linear4d(0.1, 2.0, 0.3, 0.2, 0.1),
      CoupledModel::ring(2.0, 0.3, 0.2, 0.1),
      CoupledModel::ring_cos(2.0, 0.3, 0.2, 0.1),
  };
  for (const auto& m : models) {
    MMatrix mm = build_m_matrix(m);
    CHECK(std::abs(mm.b1) < 1e-12);
    CHECK(std::abs(mm.c1) < 1e-12);
    CHECK(std::abs(mm.m_kappa(0, 1) - mm.m_kappa(1, 0)) < 1e-12);
    Eigen::Matrix2cd rebuilt = m.tau * mm.m_tau + m.kappa * mm.m_kappa;
    CHECK((rebuilt - mm.entries).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("splitting report: linear model at its coalescence parameters") {
  MMatrix mm = build_m_matrix(CoupledModel::linear4d(0.1, 2.0, 0.5, 0.25, 0.1));
  SplittingReport rep = splitting_report(mm);
  CHECK(std::abs(rep.discriminant) < 1e-12);
  CHECK(rep.regime == SplitRegime::Coalesced);
  CHECK(rep.defective);
  CHECK(std::abs(rep.lambda_c_plus - Complex(-0.25, 0.25)) < 1e-12);
  CHECK(std::abs(rep.lambda_c_minus - Complex(-0.25, 0.25)) < 1e-12);
}

TEST_CASE("splitting report: ring above its coalescence point") {
  MMatrix mm = build_m_matrix(CoupledModel::ring(2.0, 0.1, 0.2, 0.1));
  SplittingReport rep = splitting_report(mm);
  const double s = std::sqrt(0.03);
  CHECK(rep.regime == SplitRegime::SplitRealParts);
  CHECK(std::abs(rep.discriminant - s) < 1e-12);
  CHECK(std::abs(rep.lambda_c_plus - Complex(s / 2, 0.05)) < 1e-12);
  CHECK(std::abs(rep.lambda_c_minus - Complex(-s / 2, 0.05)) < 1e-12);
  CHECK(std::abs(rep.lambda_c_plus + rep.lambda_c_minus - mm.entries.trace()) < 1e-12);
}

TEST_CASE("splitting report: cos-coupled ring splits only imaginary parts") {
  for (auto [t, k] : {std::pair{0.3, 0.2}, {0.1, 0.4}, {-0.25, 0.3}}) {
    MMatrix mm = build_m_matrix(CoupledModel::ring_cos(2.0, t, k, 0.1));
    SplittingReport rep = splitting_report(mm);
    CHECK(rep.regime == SplitRegime::SplitImagParts);
    Complex want = Complex(0, std::sqrt(t * t + k * k));
    CHECK(std::abs(rep.discriminant - want) < 1e-12);
  }
}

TEST_CASE("splitting report: discrete model splits both parts") {
  MMatrix mm = build_m_matrix(CoupledModel::discrete9(2.0, 0.5, 0.2));
  SplittingReport rep = splitting_report(mm);
  CHECK(rep.regime == SplitRegime::MixedSplit);
}

TEST_CASE("splitting report: scalar matrix is the no-splitting case") {
  MMatrix mm;
  mm.kind = ModelKind::Ring2D;
  mm.kappa = 0.3;
  mm.tau = 0.0;
  mm.m_tau.setZero();
  mm.m_kappa << Complex(-0.5, 0.1), 0, 0, Complex(-0.5, 0.1);
  mm.m_tau_natural = mm.m_tau;
  mm.m_kappa_natural = mm.m_kappa;
  mm.entries = mm.kappa * mm.m_kappa;
  mm.beta = 0;
  SplittingReport rep = splitting_report(mm);
  CHECK(rep.regime == SplitRegime::NoSplit);
  CHECK(!rep.defective);
  CHECK((rep.v_plus - Vector2cd(1, 0)).norm() < 1e-14);
  CHECK((rep.v_minus - Vector2cd(0, 1)).norm() < 1e-14);
  CHECK(std::abs(rep.lambda_c_plus - rep.lambda_c_minus) < 1e-14);
}

TEST_CASE("coalescence boundary closed forms") {
  CHECK(*kt_boundary(CoupledModel::linear4d(0.1, 2.0, 0, 0, 0.1), 0.5) ==
        doctest::Approx(0.25).epsilon(1e-12));
  CHECK(*kt_boundary(CoupledModel::ring(2.0, 0, 0, 0.1), 0.5) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(*kt_boundary(CoupledModel::discrete9(2.0, 0, 0), 0.5) ==
        doctest::Approx(std::sqrt(3.0) / 4.0).epsilon(1e-12));
  CHECK(!kt_boundary(CoupledModel::ring_cos(2.0, 0, 0, 0.1), 0.5).has_value());
  CHECK(*kt_boundary(CoupledModel::linear4d(0.1, 2.0, 0, 0, 0.1), 0.0) ==
        doctest::Approx(0.0));
}

TEST_CASE("first-order eigenvalues coincide at the boundary") {
  // Linear and sin-ring boundaries land on binary-exact values; the discrete
  // one is irrational, so its check carries the floating-point floor of the
  // discriminant square root.
  for (double tau : {0.5, 0.25}) {
    auto check = [&](const CoupledModel& fam, double tol) {
      double ks = *kt_boundary(fam, tau);
      SplittingReport rep = splitting_report(build_m_matrix(fam.with(tau, ks)));
      CHECK(std::abs(rep.lambda_c_plus - rep.lambda_c_minus) <= tol);
    };
    check(CoupledModel::linear4d(0.1, 2.0, 0, 0, 0.1), 1e-10);
    check(CoupledModel::ring(2.0, 0, 0, 0.1), 1e-10);
    check(CoupledModel::discrete9(2.0, 0, 0), 4e-8);
  }
}

TEST_CASE("first-order eigenvalue error: exact models are exactly affine") {
  // The closed-form eigenvalues of both finite-generator models are affine
  // in a joint (kappa, tau) scaling, so the first-order error sits at
  // rounding level for every epsilon.
  for (auto fam : {CoupledModel::linear4d(0.1, 2.0, 0, 0, 0.1), CoupledModel::discrete9(2.0, 0, 0)}) {
    Complex lam1 = unperturbed_eigendata(fam).lambda1;
    for (double eps : {0.02, 0.04, 0.08, 0.16}) {
      CoupledModel m = fam.with(eps * 0.3, eps * 0.5);
      auto [lp, lm] = exact_lambda_pm(m);
      SplittingReport rep = splitting_report(build_m_matrix(m));
      double err = std::min(
          std::abs(lp - lam1 - rep.lambda_c_plus) + std::abs(lm - lam1 - rep.lambda_c_minus),
          std::abs(lp - lam1 - rep.lambda_c_minus) + std::abs(lm - lam1 - rep.lambda_c_plus));
      CHECK(err < 1e-12 * std::max(1.0, std::abs(lam1)));
    }
  }
}

TEST_CASE("first-order eigenvalue error: ring scales quadratically") {
  CoupledModel fam = CoupledModel::ring(2.0, 0, 0, 0.1);
  Complex lam1 = unperturbed_eigendata(fam).lambda1;
  std::vector<double> eps{0.02, 0.04, 0.08, 0.16};
  std::vector<double> errs;
  for (double e : eps) {
    CoupledModel m = fam.with(e * 0.3, e * 0.5);
    auto [lp, lm] = ring_leading_pair(m, 60);
    SplittingReport rep = splitting_report(build_m_matrix(m));
    double err = std::min(
        std::abs(lp - lam1 - rep.lambda_c_plus) + std::abs(lm - lam1 - rep.lambda_c_minus),
        std::abs(lp - lam1 - rep.lambda_c_minus) + std::abs(lm - lam1 - rep.lambda_c_plus));
    errs.push_back(err);
  }
  CHECK(loglog_slope(eps, errs) >= 1.8);
}

TEST_CASE("stationary correction: ring matches the closed form") {
  CoupledModel m = CoupledModel::ring(2.0, 0.0, 0.2, 0.1);
  auto corr = std::get<FourierField>(stationary_correction(m, 40));
  const double want = m.kappa / (8.0 * m.diffusion * kPi * kPi);
  for (int j = -corr.J; j <= corr.J; ++j) {
    Complex expect = (j == 1 || j == -1) ? Complex(want, 0) : Complex(0, 0);
    CHECK(std::abs(corr.coeff(j) - expect) < 1e-8);
  }
  // pointwise: kappa cos(y - x) / (4 D pi^2)
  for (double x : {0.3, 1.9}) {
    double v = eval_stationary_correction(corr, Eigen::Vector2d(x, 2.0));
    double expect = m.kappa * std::cos(2.0 - x) / (4.0 * m.diffusion * kPi * kPi);
    CHECK(v == doctest::Approx(expect).epsilon(1e-8));
  }
}

TEST_CASE("stationary correction vanishes at zero perturbation") {
  auto ring = std::get<FourierField>(
      stationary_correction(CoupledModel::ring(2.0, 0.0, 0.0, 0.1), 30));
  CHECK(ring.z.cwiseAbs().maxCoeff() < 1e-14);
  auto disc = std::get<VectorXd>(stationary_correction(CoupledModel::discrete9(1.0, 0.0, 0.0)));
  CHECK(disc.cwiseAbs().maxCoeff() < 1e-14);
  auto lin = std::get<GaussianCovarianceCorrection>(
      stationary_correction(CoupledModel::linear4d(0.1, 2.0, 0.0, 0.0, 0.1)));
  CHECK(lin.sigma1.norm() == 0.0);
}

TEST_CASE("stationary correction: discrete solve against an independent LU route") {
  CoupledModel m = CoupledModel::discrete9(1.0, 0.0, 0.2);
  VectorXd got = std::get<VectorXd>(stationary_correction(m));
  CHECK(std::abs(got.sum()) < 1e-10);

  // independent minimum-norm route: full-pivot LU nullspace projection
  Eigen::MatrixXd c0 = discrete_rate_base(m);
  Eigen::VectorXd rhs = -(m.kappa * discrete_rate_kappa_part()) * VectorXd::Constant(9, 1.0 / 9.0);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(c0);
  VectorXd sol = cod.solve(rhs);             // minimum-norm particular solution
  sol.array() -= sol.mean();                 // project onto the zero-sum slice
  CHECK((got - sol).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((c0 * got - rhs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("stationary correction: linear covariance derivative") {
  CoupledModel m = CoupledModel::linear4d(0.1, 2.0, 0.3, 0.2, 0.1);
  auto g = std::get<GaussianCovarianceCorrection>(stationary_correction(m));
  // Lyapunov identity for the first-order covariance
  Eigen::Matrix4d a0 = linear_drift_base(m);
  Eigen::Matrix4d ak = linear_drift_kappa_part();
  Eigen::Matrix4d lhs = a0 * g.sigma1 + g.sigma1 * a0.transpose();
  Eigen::Matrix4d rhs = -m.kappa * (ak * g.sigma0 + g.sigma0 * ak.transpose());
  CHECK((lhs - rhs).norm() < 1e-12);

  // density derivative vs a central difference of the Gaussian family
  auto gauss = [&](const Eigen::Matrix4d& cov, const VectorXd& z) {
    return std::exp(-0.5 * z.dot(cov.inverse() * z)) /
           (std::pow(kTwoPi, 2.0) * std::sqrt(cov.determinant()));
  };
  const double h = 1e-5;
  for (auto zv : {std::array<double, 4>{0.3, -0.2, 0.5, 0.1}, {1.0, 0.4, -0.7, 0.2}}) {
    VectorXd z = Eigen::Map<const Eigen::Vector4d>(zv.data());
    double fd = (gauss(g.sigma0 + h * g.sigma1, z) - gauss(g.sigma0 - h * g.sigma1, z)) / (2 * h);
    CHECK(g.eval(z) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("eigenfunction correction: identical ring gives sum and difference modes") {
  CoupledModel m = CoupledModel::ring(2.0, 0.0, 0.2, 0.1);
  EigfnCorrection plus = eigfn_correction(m, Branch::Plus, 40);
  EigfnCorrection minus = eigfn_correction(m, Branch::Minus, 40);
  CHECK(std::abs(plus.v(0) - plus.v(1)) < 1e-12);    // Q1x + Q1y
  CHECK(std::abs(minus.v(0) + minus.v(1)) < 1e-12);  // Q1x - Q1y
  CHECK(std::abs(plus.lambda_c - Complex(0.1, 0)) < 1e-12);   // kappa * beta
  CHECK(std::abs(minus.lambda_c - Complex(-0.1, 0)) < 1e-12);
  CHECK(plus.residual < 1e-8);
}

TEST_CASE("eigenfunction correction refuses the defective coalescence point") {
  CoupledModel m = CoupledModel::linear4d(0.1, 2.0, 0.5, 0.25, 0.1);
  CHECK_THROWS_AS(eigfn_correction(m, Branch::Plus), NumericalError);
}

TEST_CASE("eigenfunction correction: discrete eigenvector error is second order") {
  std::vector<double> kappas{0.01, 0.02, 0.04, 0.08};
  std::vector<double> errs;
  for (double k : kappas) {
    CoupledModel m = CoupledModel::discrete9(1.0, 0.0, k);
    EigfnCorrection c = eigfn_correction(m, Branch::Plus);
    VectorXcd assembled = std::get<StateFunction>(assemble_first_order(c, 1.0)).values;
    // oracle: exact diagonalization of C^T
    EigResult er = eig_dense(discrete_rate_matrix(m).transpose().cast<Complex>());
    auto idx = leading_oscillatory_pair(er);
    Complex lam1 = unperturbed_eigendata(m).lambda1;
    // pick the exact branch matching lambda1 + lambda_c
    Complex target = lam1 + c.lambda_c;
    int best = std::abs(er.pairs[idx[0]].lambda - target) <
                       std::abs(er.pairs[idx[1]].lambda - target)
                   ? idx[0]
                   : idx[1];
    errs.push_back(qsync::testing::angle_between(assembled, er.pairs[best].right));
  }
  double slope = loglog_slope(kappas, errs);
  CHECK(slope == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("eigenfunction correction: the linear model is exactly first order") {
  // The span of the two leading linear forms is invariant under both
  // perturbation generators, so the correction vanishes and the assembled
  // eigenvector agrees with the exact one at every parameter value.
  for (double e : {0.04, 0.16, 0.5}) {
    CoupledModel m = CoupledModel::linear4d(0.1, 2.0, 0.3 * e, 0.5 * e, 0.1);
    EigfnCorrection c = eigfn_correction(m, Branch::Plus);
    CHECK(std::get<LinearForm>(c.correction).coeffs.norm() < 1e-10);
    VectorXcd assembled = std::get<LinearForm>(assemble_first_order(c, 1.0)).coeffs;
    EigResult er = eig_dense(linear_drift(m).transpose().cast<Complex>());
    auto idx = leading_oscillatory_pair(er);
    Complex target = unperturbed_eigendata(m).lambda1 + c.lambda_c;
    int best = std::abs(er.pairs[idx[0]].lambda - target) <
                       std::abs(er.pairs[idx[1]].lambda - target)
                   ? idx[0]
                   : idx[1];
    CHECK(qsync::testing::angle_between(assembled, er.pairs[best].right) < 1e-8);
  }
}

TEST_CASE("corrections satisfy their orthogonality constraints") {
  // ring: coefficients at (1,0) and (0,1) vanish; discrete: pairings vanish
  CoupledModel ring = CoupledModel::ring(2.0, 0.1, 0.2, 0.1);
  EigfnCorrection rc = eigfn_correction(ring, Branch::Plus, 40);
  const auto& f = std::get<FourierField>(rc.correction);
  CHECK(std::abs(f.coeff(1)) < 1e-10);
  CHECK(std::abs(f.coeff(0)) < 1e-10);

  CoupledModel disc = CoupledModel::discrete9(1.0, 0.2, 0.15);
  EigfnCorrection dc = eigfn_correction(disc, Branch::Minus);
  auto ed = unperturbed_eigendata(disc);
  const auto& q = std::get<StateFunction>(dc.correction).values;
  Complex o1 = std::get<StateFunction>(ed.p1x).values.cwiseProduct(q).sum();
  Complex o2 = std::get<StateFunction>(ed.p1y).values.cwiseProduct(q).sum();
  CHECK(std::abs(o1) < 1e-10);
  CHECK(std::abs(o2) < 1e-10);
}

}  // TEST_SUITE
