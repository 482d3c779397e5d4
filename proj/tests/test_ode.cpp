#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "spectral_decay/floquet.hpp"
#include "spectral_decay/ode.hpp"

using namespace spectral_decay;

namespace {

const auto kMathieu = PeriodicPotential::fourier(0.0, {2.0});
const auto kSteps = PeriodicPotential::piecewise({0.0, 0.5}, {10.0, 0.0});

OdeOptions runge_kutta(double tol = 1e-10) {
  OdeOptions o;
  o.tol = tol;
  o.force_runge_kutta = true;
  return o;
}

TEST(Dopri5, ExponentialGrowth) {
  Eigen::VectorXd y(1);
  y << 1.0;
  double h = 0.0;
  y = dopri5([](double, const Eigen::VectorXd& v) { return Eigen::VectorXd(v); }, 0.0, 2.0, y, 1e-12, h, 100000);
  EXPECT_NEAR(y(0), std::exp(2.0), 1e-9);
  EXPECT_GT(h, 0.0);
}

TEST(Dopri5, StepBudgetExhaustion) {
  Eigen::VectorXd y(1);
  y << 1.0;
  double h = 0.0;
  EXPECT_THROW(dopri5([](double, const Eigen::VectorXd& v) { return Eigen::VectorXd(v); }, 0.0, 50.0, y, 1e-12, h, 3),
               StepFailure);
}

TEST(ConstantPiece, MatchesTrigonometricForm) {
  for (double q : {-400.0, -9.0, -0.1, 0.0, 1e-9, 0.3, 25.0}) {
    for (double h : {0.01, 0.5, 1.0}) {
      const auto t = detail::constant_piece(q, h);
      double c, s, cp;
      if (q < 0) {
        const double k = std::sqrt(-q);
        c = std::cos(k * h), s = std::sin(k * h) / k, cp = -k * std::sin(k * h);
      } else if (q > 0) {
        const double k = std::sqrt(q);
        c = std::cosh(k * h), s = std::sinh(k * h) / k, cp = k * std::sinh(k * h);
      } else {
        c = 1.0, s = h, cp = 0.0;
      }
      const double scale = std::max(1.0, std::abs(c));
      EXPECT_NEAR(t.matrix(0, 0), c, 1e-13 * scale) << q << " " << h;
      EXPECT_NEAR(t.matrix(0, 1), s, 1e-13 * scale) << q << " " << h;
      EXPECT_NEAR(t.matrix(1, 0), cp, 1e-12 * scale * std::max(1.0, std::sqrt(std::abs(q)))) << q << " " << h;
      EXPECT_NEAR(t.matrix.determinant(), 1.0, 1e-12 * scale * scale);
    }
  }
}

TEST(ConstantPiece, LambdaDerivativeMatchesDifferences) {
  for (double q : {-30.0, -0.2, 0.05, 4.0}) {
    const double h = 0.5, e = 1e-6;
    // q = U - lambda, so d/dlambda = -d/dq
    const Eigen::Matrix2d fd =
        -(detail::constant_piece(q + e, h).matrix - detail::constant_piece(q - e, h).matrix) / (2 * e);
    EXPECT_LT((detail::constant_piece(q, h).derivative - fd).norm(), 1e-7) << q;
  }
}

TEST(Monodromy, UnitDeterminant) {
  for (double l : {-5.0, 3.0, 40.0, 200.0}) {
    EXPECT_NEAR(monodromy(kMathieu, l).det(), 1.0, 1e-8) << l;
    EXPECT_NEAR(monodromy(kSteps, l).det(), 1.0, 1e-12) << l;
    EXPECT_NEAR(monodromy(kSteps, l, runge_kutta()).det(), 1.0, 1e-8) << l;
  }
}

TEST(Monodromy, MathieuAgainstFixedStepOracle) {
  auto v = [](double x) { return 2.0 * std::cos(2 * std::numbers::pi * x); };
  for (double l : {-3.0, -0.05, 5.0, 9.5, 39.5, 120.0}) {
    EXPECT_NEAR(discriminant(kMathieu, l), oracle::rk4_discriminant(v, l), 1e-8) << l;
  }
}

TEST(Monodromy, PiecewiseClosedFormAgainstKronigPenney) {
  for (double l : {10.5, 14.7, 44.6, 93.9, 500.0}) {
    EXPECT_NEAR(discriminant(kSteps, l), oracle::kronig_penney(10.0, 0.5, l), 1e-12) << l;
  }
}

TEST(Monodromy, PiecewiseRungeKuttaAgreesWithClosedForm) {
  for (double l : {-5.0, 4.4, 14.7, 44.6, 93.9}) {
    EXPECT_NEAR(discriminant(kSteps, l, runge_kutta()), discriminant(kSteps, l), 1e-8) << l;
  }
}

TEST(Monodromy, DerivativeAgainstDifferences) {
  for (const auto* V : {&kMathieu, &kSteps}) {
    for (double l : {-2.0, 6.0, 30.0}) {
      const double e = 1e-5;
      const double fd = (discriminant(*V, l + e, runge_kutta(1e-13)) - discriminant(*V, l - e, runge_kutta(1e-13))) / (2 * e);
      EXPECT_NEAR(discriminant_derivative(*V, l), fd, 1e-6) << l;
    }
  }
}

TEST(PropagateHill, BackwardInvertsForward) {
  const State2 s{0.3, -1.2};
  const State2 fwd = propagate_hill(kMathieu, 7.0, -0.4, 2.3, s);
  const State2 back = propagate_hill(kMathieu, 7.0, 2.3, -0.4, fwd);
  EXPECT_NEAR(back.y, s.y, 1e-8);
  EXPECT_NEAR(back.yp, s.yp, 1e-8);
}

TEST(PropagateHill, WronskianConserved) {
  const CoupledPotential U{kSteps, CompactPerturbation::indicator(0.0, 1.0), 14.4};
  State2 a{1.0, 0.0}, b{0.0, 1.0};
  for (double x = 0.0; x < 3.0; x += 0.25) {
    a = propagate_hill(U, 14.7, x, x + 0.25, a);
    b = propagate_hill(U, 14.7, x, x + 0.25, b);
    EXPECT_NEAR(a.y * b.yp - a.yp * b.y, 1.0, 1e-10);
  }
}

TEST(PropagateDirac, Linearity) {
  const auto W = MatrixPerturbation::scalar_well(-1.0, 1.0, -0.5);
  SpinorState s1, s2;
  s1 << 1.0, std::complex<double>(0, 0.5);
  s2 << std::complex<double>(-0.2, 0.1), 2.0;
  const std::complex<double> a(0.7, -1.1), b(2.0, 0.3);
  const SpinorState lhs = propagate_dirac(W, 1.0, 0.3, -1.0, 1.0, SpinorState(a * s1 + b * s2));
  const SpinorState rhs = a * propagate_dirac(W, 1.0, 0.3, -1.0, 1.0, s1) + b * propagate_dirac(W, 1.0, 0.3, -1.0, 1.0, s2);
  EXPECT_LT((lhs - rhs).norm(), 1e-9 * rhs.norm());
}

TEST(PropagateDirac, TracelessGeneratorPreservesDeterminant) {
  const auto W = MatrixPerturbation::scalar_well(-1.0, 1.0, -0.5);
  SpinorState e1, e2;
  e1 << 1.0, 0.0;
  e2 << 0.0, 1.0;
  const SpinorState c1 = propagate_dirac(W, 1.0, 0.4, -1.0, 1.0, e1);
  const SpinorState c2 = propagate_dirac(W, 1.0, 0.4, -1.0, 1.0, e2);
  EXPECT_NEAR(std::abs(c1(0) * c2(1) - c1(1) * c2(0)), 1.0, 1e-9);
}

TEST(PropagateDirac, FreeGeneratorSquaresToKappaSquared) {
  const double m = 1.3, l = 0.4;
  const Eigen::Matrix2cd K = dirac_generator(m, l, Eigen::Matrix2cd::Zero());
  const Eigen::Matrix2cd K2 = K * K;
  EXPECT_LT((K2 - (m * m - l * l) * Eigen::Matrix2cd::Identity()).norm(), 1e-14);
}

}  // namespace
