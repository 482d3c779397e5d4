#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spectral_decay/potential.hpp"

using namespace spectral_decay;
using Eigen::Matrix2cd;

namespace {

const double kPi = std::numbers::pi;

TEST(PeriodicPotential, ZeroEverywhere) {
  const auto V = PeriodicPotential::zero();
  EXPECT_TRUE(V.is_zero());
  EXPECT_TRUE(V.is_piecewise_constant());
  for (double x : {-3.7, 0.0, 0.25, 12.5}) EXPECT_EQ(V(x), 0.0);
}

TEST(PeriodicPotential, FourierValues) {
  const auto V = PeriodicPotential::fourier(0.5, {2.0}, {0.0, 1.0});
  EXPECT_FALSE(V.is_piecewise_constant());
  for (double x : {0.0, 0.1, 0.37, 0.9}) {
    const double expected = 0.5 + 2.0 * std::cos(2 * kPi * x) + std::sin(4 * kPi * x);
    EXPECT_NEAR(V(x), expected, 1e-14);
  }
}

TEST(PeriodicPotential, PiecewiseIsRightContinuous) {
  const auto V = PeriodicPotential::piecewise({0.0, 0.5}, {10.0, 0.0});
  EXPECT_EQ(V(0.0), 10.0);
  EXPECT_EQ(V(0.4999999), 10.0);
  EXPECT_EQ(V(0.5), 0.0);
  EXPECT_EQ(V(0.999), 0.0);
  EXPECT_EQ(V(1.0), 10.0);
  EXPECT_EQ(V(-0.25), 0.0);
}

TEST(PeriodicPotential, PeriodicityProperty) {
  const std::vector<PeriodicPotential> vs{PeriodicPotential::fourier(1.0, {2.0, -0.3}, {0.7}),
                                          PeriodicPotential::piecewise({0.0, 0.2, 0.7}, {1.0, -2.0, 3.0})};
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (const auto& V : vs) {
    for (int i = 0; i < 200; ++i) {
      const double x = u(rng);
      EXPECT_NEAR(V(x + 1.0), V(x), 1e-12);
      EXPECT_NEAR(V(x - 3.0), V(x), 1e-12);
    }
  }
}

TEST(PeriodicPotential, MaxAbsBoundsSamples) {
  const auto V = PeriodicPotential::fourier(-1.0, {2.0, 0.5}, {1.5});
  const double bound = V.max_abs();
  for (int i = 0; i <= 1000; ++i) EXPECT_LE(std::abs(V(i / 1000.0)), bound + 1e-12);
  EXPECT_EQ(PeriodicPotential::piecewise({0.0, 0.5}, {10.0, -3.0}).max_abs(), 10.0);
}

TEST(PeriodicPotential, BreakpointsInWindow) {
  const auto V = PeriodicPotential::piecewise({0.0, 0.5}, {10.0, 0.0});
  const auto b = V.breakpoints_in(-0.75, 1.25);
  const std::vector<double> expected{-0.5, 0.0, 0.5, 1.0};
  ASSERT_EQ(b.size(), expected.size());
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_DOUBLE_EQ(b[i], expected[i]);
  EXPECT_TRUE(PeriodicPotential::fourier(0.0, {1.0}).breakpoints_in(0.0, 5.0).empty());
}

TEST(PeriodicPotential, RejectsMalformedPiecewise) {
  EXPECT_THROW(PeriodicPotential::piecewise({0.1, 0.5}, {1.0, 2.0}), ValidationError);
  EXPECT_THROW(PeriodicPotential::piecewise({0.0, 0.5, 0.4}, {1.0, 2.0, 3.0}), ValidationError);
  EXPECT_THROW(PeriodicPotential::piecewise({0.0, 1.0}, {1.0, 2.0}), ValidationError);
  EXPECT_THROW(PeriodicPotential::piecewise({0.0, 0.5}, {1.0}), ValidationError);
  EXPECT_THROW(PeriodicPotential::piecewise({0.0}, {NAN}), ValidationError);
  EXPECT_THROW(PeriodicPotential::fourier(INFINITY, {}), ValidationError);
}

TEST(PeriodicPotentialJson, RoundTrip) {
  for (const auto& V : {PeriodicPotential::zero(), PeriodicPotential::fourier(0.25, {2.0, 1.0}, {0.5}),
                        PeriodicPotential::piecewise({0.0, 0.3}, {4.0, -1.0})}) {
    const auto back = load_potential(to_json(V));
    for (int i = 0; i < 50; ++i) EXPECT_EQ(back(i * 0.0371), V(i * 0.0371));
    EXPECT_EQ(to_json(back), to_json(V));
  }
}

TEST(PeriodicPotentialJson, SchemaErrors) {
  EXPECT_THROW(load_potential(std::string("{not json")), SchemaError);
  EXPECT_THROW(load_potential(nlohmann::json{{"mean", 1.0}}), SchemaError);
  EXPECT_THROW(load_potential(nlohmann::json{{"type", "gaussian"}}), SchemaError);
  EXPECT_THROW(load_potential(nlohmann::json{{"type", "piecewise"}, {"breaks", {0.0}}}), SchemaError);
  EXPECT_THROW(load_potential(nlohmann::json{{"type", "fourier"}, {"cos", {"a"}}}), SchemaError);
}

TEST(CompactPerturbation, IndicatorVanishesOutsideSupport) {
  const auto Q = CompactPerturbation::indicator(-1.0, 1.0);
  EXPECT_EQ(Q(-1.0), 1.0);
  EXPECT_EQ(Q(0.3), 1.0);
  EXPECT_EQ(Q(1.0), 1.0);  // closed support
  EXPECT_EQ(Q(1.0001), 0.0);
  EXPECT_EQ(Q(-1.0001), 0.0);
  EXPECT_EQ(Q(5.0), 0.0);
  EXPECT_DOUBLE_EQ(Q.width(), 2.0);
  EXPECT_TRUE(Q.is_piecewise_constant());
}

TEST(CompactPerturbation, ProfileIsRescaledToSupport) {
  // G(t) = 1 + cos(2 pi t) on t = (x - a)/(b - a), Q = G^2
  const CompactPerturbation Q(2.0, 4.0, PeriodicPotential::fourier(1.0, {1.0}));
  EXPECT_NEAR(Q.G(2.0), 2.0, 1e-14);
  EXPECT_NEAR(Q(2.0), 4.0, 1e-14);
  EXPECT_NEAR(Q(3.0), 0.0, 1e-14);
  EXPECT_NEAR(Q(3.5), 1.0, 1e-14);
  EXPECT_FALSE(Q.is_piecewise_constant());
}

TEST(CompactPerturbation, RejectsInvalidProfiles) {
  EXPECT_THROW(CompactPerturbation(1.0, 1.0, PeriodicPotential::fourier(1.0, {})), ValidationError);
  EXPECT_THROW(CompactPerturbation(0.0, 1.0, PeriodicPotential::fourier(0.0, {1.0})), ValidationError);
  EXPECT_THROW(CompactPerturbation(0.0, 1.0, PeriodicPotential::zero()), ValidationError);
}

TEST(CompactPerturbationJson, RoundTrip) {
  const auto Q = CompactPerturbation::indicator(-0.5, 1.5);
  const auto back = load_perturbation(to_json(Q));
  EXPECT_EQ(back.lower(), -0.5);
  EXPECT_EQ(back.upper(), 1.5);
  EXPECT_EQ(back(0.0), 1.0);
  EXPECT_THROW(load_perturbation(nlohmann::json{{"support", {0.0}}, {"profile", {{"type", "zero"}}}}), SchemaError);
}

TEST(MatrixPerturbation, ScalarWell) {
  const auto W = MatrixPerturbation::scalar_well(-1.0, 1.0, -0.5);
  EXPECT_TRUE(W(0.0).isApprox(-0.5 * Matrix2cd::Identity()));
  EXPECT_TRUE(W(1.0).isZero());
  EXPECT_TRUE(W(-2.0).isZero());
  EXPECT_EQ(W.sigma1_integral(), 0.0);
  EXPECT_FALSE(W.is_zero());
}

TEST(MatrixPerturbation, Sigma1Integral) {
  Matrix2cd s1;
  s1 << 0, 0.3, 0.3, 0;
  const MatrixPerturbation W(0.0, 2.0, {0.0, 1.5}, {s1, 2.0 * s1});
  EXPECT_NEAR(W.sigma1_integral(), 0.3 * 1.5 + 0.6 * 0.5, 1e-15);
}

TEST(MatrixPerturbation, RejectsNonHermitian) {
  Matrix2cd a;
  a << 0, 1, 0, 0;
  EXPECT_THROW(MatrixPerturbation(0.0, 1.0, {0.0}, {a}), ValidationError);
  EXPECT_THROW(MatrixPerturbation(0.0, 1.0, {0.0, 0.5}, {Matrix2cd::Identity()}), ValidationError);
}

TEST(MatrixPerturbationJson, LoadsRowMajorEntries) {
  const auto doc = nlohmann::json::parse(R"({"support":[-1,1],"matrices":[[[0,0],[0,-2],[0,2],[0,0]]]})");
  const auto W = load_matrix_perturbation(doc);
  EXPECT_EQ(W(0.0)(0, 1), std::complex<double>(0, -2));
  EXPECT_EQ(W(0.0)(1, 0), std::complex<double>(0, 2));
  EXPECT_THROW(load_matrix_perturbation(nlohmann::json::parse(R"({"support":[0,1],"matrices":[[[1,0]]]})")),
               SchemaError);
}

}  // namespace
