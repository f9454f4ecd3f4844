#include <doctest.h>

#include "oracles.hpp"
#include "qsync/models.hpp"
#include "qsync/rng.hpp"
#include "qsync/spectral.hpp"

using namespace qsync;

TEST_SUITE("models") {

TEST_CASE("constructor guards") {
  CHECK_THROWS_AS(CoupledModel::discrete9(1.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(CoupledModel::discrete9(1.0, -0.5, 0.6), std::invalid_argument);
  CHECK_NOTHROW(CoupledModel::discrete9(1.0, -0.5, 0.4));
  CHECK_THROWS_AS(CoupledModel::ring(2.0, 0.0, 0.0, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(CoupledModel::linear4d(0.0, 2.0, 0.0, 0.0, 0.1), std::invalid_argument);
}

TEST_CASE("uncoupled linear drift is block diagonal with a repeated pair") {
  CoupledModel m = CoupledModel::linear4d(0.1, 2.0, 0.0, 0.0, 0.1);
  Eigen::Matrix4d a = linear_drift(m);
  CHECK(a.topRightCorner<2, 2>().norm() == 0.0);
  CHECK(a.bottomLeftCorner<2, 2>().norm() == 0.0);
  EigResult r = eig_dense(a.cast<Complex>());
  int up = 0, down = 0;
  for (const auto& p : r.pairs) {
    if (p.lambda.imag() > 0) {
      CHECK(std::abs(p.lambda - Complex(-0.1, 2.0)) < 1e-12);
      ++up;
    } else {
      CHECK(std::abs(p.lambda - Complex(-0.1, -2.0)) < 1e-12);
      ++down;
    }
  }
  CHECK(up == 2);
  CHECK(down == 2);
}

TEST_CASE("uncoupled discrete rate matrix has the repeated cycle eigenvalue") {
  CoupledModel m = CoupledModel::discrete9(1.0, 0.0, 0.0);
  EigResult r = eig_dense(discrete_rate_matrix(m).cast<Complex>());
  const Complex lam1(-1.5, std::sqrt(3.0) / 2.0);
  int count = 0;
  for (const auto& p : r.pairs)
    if (std::abs(p.lambda - lam1) < 1e-9) ++count;
  CHECK(count == 2);
}

TEST_CASE("discrete rate matrix conserves probability") {
  for (auto [om, tau, kap] : {std::tuple{1.0, 0.0, 0.0}, {2.0, 0.5, 0.3}, {10.0, 5.0, 4.0},
                              {1.0, -0.3, 0.2}}) {
    Eigen::MatrixXd c = discrete_rate_matrix(CoupledModel::discrete9(om, tau, kap));
    CHECK(c.colwise().sum().cwiseAbs().maxCoeff() < 1e-12 * om * 9);
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 9; ++j)
        if (i != j) CHECK(c(i, j) >= 0.0);
  }
}

TEST_CASE("ring models have no finite generator") {
  CHECK_THROWS_AS(generator_matrix(CoupledModel::ring(2.0, 0.0, 0.0, 0.1)),
                  std::invalid_argument);
}

TEST_CASE("exact branch pair: linear identical coupling") {
  auto [lp, lm] = exact_lambda_pm(CoupledModel::linear4d(0.1, 2.0, 0.0, 0.3, 0.1));
  CHECK(std::abs(lp - Complex(-0.1, 2.0)) < 1e-14);
  CHECK(std::abs(lm - Complex(-0.7, 2.0)) < 1e-14);
}

TEST_CASE("exact branch pair: linear below the coalescence point") {
  auto [lp, lm] = exact_lambda_pm(CoupledModel::linear4d(0.1, 2.0, 0.5, 0.1, 0.1));
  const double s = 0.5 * std::sqrt(0.21);  // 0.2291287847...
  CHECK(std::abs(lp - Complex(-0.2, 2.25 + s)) < 1e-14);
  CHECK(std::abs(lm - Complex(-0.2, 2.25 - s)) < 1e-14);
  CHECK(s == doctest::Approx(0.22913).epsilon(1e-4));
}

TEST_CASE("exact branch pair: discrete at its coalescence locus") {
  // kappa* = 5 sqrt(3)/2 is irrational: the discriminant 4k^2 - 3t^2 lands at
  // rounding level and its square root splits the pair by ~sqrt(eps).
  const double kt = 5.0 * std::sqrt(3.0) / 2.0;
  auto [lp, lm] = exact_lambda_pm(CoupledModel::discrete9(10.0, 5.0, kt));
  CHECK(std::abs(lp - lm) < 1e-6 * std::abs(lp));
  CHECK(lp.real() == doctest::Approx(-18.75).epsilon(1e-7));
  CHECK(lp.imag() == doctest::Approx(10.825317547305483).epsilon(1e-7));
}

TEST_CASE("unperturbed eigendata") {
  SUBCASE("ring") {
    auto ed = unperturbed_eigendata(CoupledModel::ring(2.0, 0.0, 0.0, 0.1));
    CHECK(std::abs(ed.lambda1 - Complex(-0.1, 2.0)) < 1e-14);
    const auto& q = std::get<FourierField>(ed.q1x);
    CHECK(std::abs(q.coeff(1) - 1.0) < 1e-14);  // mode (1, 0)
    CHECK(std::abs(q.coeff(0)) == 0.0);
  }
  SUBCASE("linear") {
    auto ed = unperturbed_eigendata(CoupledModel::linear4d(0.1, 2.0, 0.0, 0.0, 0.1));
    const auto& q = std::get<LinearForm>(ed.q1x);
    const double c = std::sqrt(0.5);  // sqrt(eta / 2D) at eta = D = 0.1
    CHECK(std::abs(q.coeffs(0) - Complex(0, c)) < 1e-14);
    CHECK(std::abs(q.coeffs(1) - Complex(c, 0)) < 1e-14);
  }
  SUBCASE("discrete") {
    auto ed = unperturbed_eigendata(CoupledModel::discrete9(1.0, 0.0, 0.0));
    CHECK(std::abs(ed.lambda1 - Complex(-1.5, 0.8660254037844386)) < 1e-12);
  }
}

TEST_CASE("eigendata is biorthonormal and unit variance") {
  for (auto m : {CoupledModel::linear4d(0.1, 2.0, 0.0, 0.0, 0.1),
                 CoupledModel::discrete9(1.0, 0.0, 0.0)}) {
    auto ed = unperturbed_eigendata(m);
    // pairing <Q1x, P1x> = 1, <Q1x, P1y> = 0 via the bilinear conventions
    if (m.kind == ModelKind::Linear4D) {
      auto dot = [](const EigenfunctionDescriptor& p, const EigenfunctionDescriptor& q) {
        return std::get<LinearForm>(p).coeffs.cwiseProduct(std::get<LinearForm>(q).coeffs).sum();
      };
      CHECK(std::abs(dot(ed.p1x, ed.q1x) - 1.0) < 1e-12);
      CHECK(std::abs(dot(ed.p1x, ed.q1y)) < 1e-12);
      CHECK(std::abs(dot(ed.p1y, ed.q1y) - 1.0) < 1e-12);
    } else {
      auto dot = [](const EigenfunctionDescriptor& p, const EigenfunctionDescriptor& q) {
        return std::get<StateFunction>(p).values.cwiseProduct(std::get<StateFunction>(q).values)
            .sum();
      };
      CHECK(std::abs(dot(ed.p1x, ed.q1x) - 1.0) < 1e-12);
      CHECK(std::abs(dot(ed.p1x, ed.q1y)) < 1e-12);
    }
  }
}

TEST_CASE("quality factors") {
  CHECK(quality_factor(Complex(-0.1, 2.0)) == doctest::Approx(20.0).epsilon(1e-14));
  Complex lam = Complex(-1.5, std::sqrt(3.0) / 2.0);
  CHECK(quality_factor(lam) == doctest::Approx(std::sqrt(3.0) / 3.0).epsilon(1e-14));
  CHECK(quality_factor(Complex(-1, 1)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(quality_factor(Complex(0, 2)), std::invalid_argument);
}

TEST_CASE("backward generator reproduces eigenrelations for linear forms") {
  CoupledModel m = CoupledModel::linear4d(0.1, 2.0, 0.3, 0.2, 0.1);
  EigResult r = eig_dense(linear_drift(m).transpose().cast<Complex>());
  auto idx = leading_oscillatory_pair(r);
  LinearForm f{Vector4cd(r.pairs[idx[0]].right)};
  Rng rng(5);
  for (int k = 0; k < 5; ++k) {
    VectorXd z(4);
    for (int i = 0; i < 4; ++i) z(i) = rng.normal();
    Complex lhs = apply_backward_generator(m, f, z);
    Complex rhs = r.pairs[idx[0]].lambda * eval_observable(f, z, -1);
    CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("backward generator on ring modes and constants") {
  CoupledModel m = CoupledModel::ring(2.0, 0.0, 0.0, 0.1);
  auto ed = unperturbed_eigendata(m);
  VectorXd p(2);
  p << 1.1, 2.3;
  Complex got = apply_backward_generator(m, ed.q1x, p);
  Complex want = Complex(-0.1, 2.0) * std::polar(1.0, p(0));
  CHECK(std::abs(got - want) < 1e-12);

  FourierField constant{0, 0, VectorXcd::Ones(1)};
  CHECK(std::abs(apply_backward_generator(m, constant, p)) < 1e-14);
  StateFunction ones{VectorXcd::Ones(9)};
  CoupledModel d = CoupledModel::discrete9(1.0, 0.3, 0.2);
  CHECK(std::abs(apply_backward_generator(d, ones, VectorXd(), 4)) < 1e-12);
}

TEST_CASE("backward generator: eigenrelation at random points, analytic and FD") {
  Rng rng(21);
  SUBCASE("continuous models") {
    for (auto m : {CoupledModel::linear4d(0.1, 2.0, 0.0, 0.0, 0.1),
                   CoupledModel::ring(2.0, 0.0, 0.0, 0.1)}) {
      auto ed = unperturbed_eigendata(m);
      for (int k = 0; k < 100; ++k) {
        VectorXd z(m.state_dim());
        for (int i = 0; i < z.size(); ++i)
          z(i) = m.is_ring() ? rng.uniform() * kTwoPi : rng.normal();
        Complex fval = eval_observable(ed.q1x, z, -1);
        Complex want = ed.lambda1 * fval;
        Complex got = apply_backward_generator(m, ed.q1x, z);
        CHECK(std::abs(got - want) <= 1e-6 * std::max(1.0, std::abs(want)));
        auto fn = [&](const VectorXd& p) { return eval_observable(ed.q1x, p, -1); };
        Complex fd = apply_backward_generator_fd(m, fn, z);
        CHECK(std::abs(fd - want) <= 1e-3 * std::max(1.0, std::abs(want)));
      }
    }
  }
  SUBCASE("discrete model") {
    CoupledModel m = CoupledModel::discrete9(1.0, 0.0, 0.0);
    auto ed = unperturbed_eigendata(m);
    for (int s = 0; s < 9; ++s) {
      Complex want = ed.lambda1 * eval_observable(ed.q1x, VectorXd(), s);
      CHECK(std::abs(apply_backward_generator(m, ed.q1x, VectorXd(), s) - want) < 1e-12);
    }
  }
}

TEST_CASE("FD step underflow is rejected") {
  CoupledModel m = CoupledModel::ring(2.0, 0.0, 0.0, 0.1);
  auto fn = [](const VectorXd&) { return Complex(1, 0); };
  CHECK_THROWS_AS(apply_backward_generator_fd(m, fn, Eigen::Vector2d(0, 0), 1e-300),
                  std::invalid_argument);
}

TEST_CASE("linear generator matches the closed form on a 20x20 grid") {
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      double tau = -1.0 + 2.0 * i / 19.0;
      double kappa = 1.0 * j / 19.0;
      CoupledModel m = CoupledModel::linear4d(0.1, 2.0, tau, kappa, 0.1);
      auto [lp, lm] = exact_lambda_pm(m);
      EigResult r = eig_dense(generator_matrix(m).cast<Complex>());
      std::vector<Complex> want{lp, lm, std::conj(lp), std::conj(lm)};
      for (const auto& p : r.pairs) {
        double best = 1e300;
        for (Complex w : want) best = std::min(best, std::abs(p.lambda - w));
        CHECK(best < 1e-10);
      }
    }
}

TEST_CASE("discrete generator matches the closed form on a grid") {
  for (int i = 0; i < 15; ++i)
    for (int j = 0; j < 15; ++j) {
      double tau = -1.0 + 2.0 * i / 14.0;
      double kappa = 0.9 * j / 14.0;
      CoupledModel m = CoupledModel::discrete9(2.0, tau, kappa);
      auto [lp, lm] = exact_lambda_pm(m);
      EigResult r = eig_dense(discrete_rate_matrix(m).cast<Complex>());
      auto idx = leading_oscillatory_pair(r);
      double err = std::min(std::abs(r.pairs[idx[0]].lambda - lp) +
                                std::abs(r.pairs[idx[1]].lambda - lm),
                            std::abs(r.pairs[idx[0]].lambda - lm) +
                                std::abs(r.pairs[idx[1]].lambda - lp));
      CHECK(err < 2e-10);
    }
}

TEST_CASE("discrete stationary vector is a probability") {
  for (auto [om, tau, kap] : {std::tuple{1.0, 0.0, 0.2}, {2.0, 0.5, 0.4}, {1.0, 0.0, 0.95}}) {
    auto rho = std::get<DiscreteStationary>(
        stationary_density(CoupledModel::discrete9(om, tau, kap)));
    CHECK(rho.p.minCoeff() >= 0.0);
    CHECK(rho.p.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("robustly oscillatory validation") {
  // uncoupled linear: spectrum of the drift matrix
  CoupledModel lin = CoupledModel::linear4d(0.1, 2.0, 0.0, 0.3, 0.1);
  EigResult r = eig_dense(generator_matrix(lin).cast<Complex>());
  VectorXcd spectrum(r.pairs.size() + 1);
  spectrum(0) = 0;
  for (std::size_t i = 0; i < r.pairs.size(); ++i) spectrum(i + 1) = r.pairs[i].lambda;
  OscillatoryReport rep = validate_robustly_oscillatory(spectrum);
  CHECK(rep.stable);
  CHECK(rep.unique_leading);
  CHECK(rep.quality_large);

  // discrete subsystem: quality factor below one, reported not asserted
  CoupledModel d = CoupledModel::discrete9(1.0, 0.0, 0.0);
  EigResult rd = eig_dense(discrete_rate_matrix(d).cast<Complex>());
  VectorXcd spectrum_d(rd.pairs.size());
  for (std::size_t i = 0; i < rd.pairs.size(); ++i) spectrum_d(i) = rd.pairs[i].lambda;
  OscillatoryReport repd = validate_robustly_oscillatory(spectrum_d);
  CHECK(repd.stable);
  CHECK(repd.quality == doctest::Approx(std::sqrt(3.0) / 3.0).epsilon(1e-9));
  CHECK(!repd.quality_large);
}

}  // TEST_SUITE
