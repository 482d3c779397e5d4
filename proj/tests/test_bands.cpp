#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "spectral_decay/bands.hpp"

using namespace spectral_decay;

namespace {

const auto kMathieu = PeriodicPotential::fourier(0.0, {2.0});
const auto kSteps = PeriodicPotential::piecewise({0.0, 0.5}, {10.0, 0.0});
const double kPi = std::numbers::pi;

TEST(BandEdges, FreeOperatorHasOnlyTheBottom) {
  const auto b = band_edges(PeriodicPotential::zero(), 50.0);
  EXPECT_NEAR(b.lambda0, 0.0, 1e-12);
  EXPECT_TRUE(b.gaps.empty());
  ASSERT_EQ(b.edges.size(), 1u);
  ASSERT_EQ(b.closed_gaps.size(), 2u);
  EXPECT_NEAR(b.closed_gaps[0], kPi * kPi, 1e-6);
  EXPECT_NEAR(b.closed_gaps[1], 4 * kPi * kPi, 1e-6);
  EXPECT_FALSE(b.incomplete);
}

TEST(BandEdges, MathieuEdgesSolveTheOracleDiscriminant) {
  auto v = [](double x) { return 2.0 * std::cos(2 * kPi * x); };
  const auto b = band_edges(kMathieu, 45.0);
  ASSERT_GE(b.gaps.size(), 2u);
  EXPECT_NEAR(oracle::rk4_discriminant(v, b.lambda0), 1.0, 1e-7);
  EXPECT_NEAR(oracle::rk4_discriminant(v, b.gaps[0].lower), -1.0, 1e-7);
  EXPECT_NEAR(oracle::rk4_discriminant(v, b.gaps[0].upper), -1.0, 1e-7);
  EXPECT_NEAR(oracle::rk4_discriminant(v, b.gaps[1].lower), 1.0, 1e-7);
  EXPECT_NEAR(oracle::rk4_discriminant(v, b.gaps[1].upper), 1.0, 1e-7);
  EXPECT_NEAR(b.gaps[0].width(), 2.0, 0.01);
}

TEST(BandEdges, MathieuBottomAgainstSturmCount) {
  const auto b = band_edges(kMathieu, 5.0);
  const oracle::HillFD fd([](double x) { return 2.0 * std::cos(2 * kPi * x); }, 40.0, 200000);
  EXPECT_EQ(fd.count_below(b.lambda0 - 1e-3), 0);
  EXPECT_GT(fd.count_below(b.lambda0 + 1e-2), 0);
}

TEST(BandEdges, StepPotentialGapsMatchKronigPenney) {
  const auto b = band_edges(kSteps, 500.0);
  // widths from the closed-form dispersion, independently bisected
  const std::vector<double> widths{6.3496239607, 0.6266996566, 2.1023956472, 0.1580139710,
                                   1.2691119177, 0.0703068973, 0.9079687915};
  ASSERT_EQ(b.gaps.size(), widths.size());
  for (std::size_t i = 0; i < widths.size(); ++i) {
    EXPECT_NEAR(b.gaps[i].width(), widths[i], 1e-8) << i;
    const double target = i % 2 == 0 ? -1.0 : 1.0;
    EXPECT_NEAR(oracle::kronig_penney(10.0, 0.5, b.gaps[i].lower), target, 1e-10);
    EXPECT_NEAR(oracle::kronig_penney(10.0, 0.5, b.gaps[i].upper), target, 1e-10);
  }
  EXPECT_NEAR(b.gaps[0].lower, 11.557802150843951, 1e-8);
}

TEST(BandEdges, EdgesStrictlyIncreasing) {
  const auto b = band_edges(kSteps, 300.0);
  for (std::size_t i = 1; i < b.edges.size(); ++i) EXPECT_LT(b.edges[i - 1], b.edges[i]);
  EXPECT_EQ(b.edges.size(), 1 + 2 * b.gaps.size());
}

TEST(BandEdges, SmallGapFoundByRefinement) {
  // second Mathieu gap has width ~0.05 against a 0.5 initial spacing
  BandOptions opts;
  opts.grid_step = 0.5;
  const auto b = band_edges(kMathieu, 45.0, opts);
  ASSERT_GE(b.gaps.size(), 2u);
  EXPECT_NEAR(b.gaps[1].width(), 0.0506, 1e-3);
}

TEST(BandEdges, IndependentOfWorkerCount) {
  ::setenv("SPECTRAL_DECAY_THREADS", "1", 1);
  const auto one = band_edges(kSteps, 200.0);
  ::setenv("SPECTRAL_DECAY_THREADS", "5", 1);
  const auto five = band_edges(kSteps, 200.0);
  ::unsetenv("SPECTRAL_DECAY_THREADS");
  ASSERT_EQ(one.edges.size(), five.edges.size());
  for (std::size_t i = 0; i < one.edges.size(); ++i) EXPECT_EQ(one.edges[i], five.edges[i]);
}

TEST(SpectralDistance, PiecewiseDefinition) {
  const auto b = band_edges(kMathieu, 45.0);
  EXPECT_DOUBLE_EQ(spectral_distance(b, b.lambda0 - 2.0), 2.0);
  const Gap g = b.gaps[0];
  EXPECT_DOUBLE_EQ(spectral_distance(b, g.midpoint()), 0.5 * g.width());
  EXPECT_NEAR(spectral_distance(b, g.lower + 0.1), 0.1, 1e-12);
  EXPECT_EQ(spectral_distance(b, 20.0), 0.0);
  EXPECT_THROW(spectral_distance(b, 45.0), OutOfCertifiedRange);
  EXPECT_TRUE(gap_containing(b, g.midpoint()).has_value());
  EXPECT_FALSE(gap_containing(b, 20.0).has_value());
}

TEST(EdgesCsv, Layout) {
  std::ostringstream os;
  write_edges_csv(os, band_edges(kMathieu, 12.0));
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "lambda_edge,kind");
  std::getline(in, line);
  EXPECT_NE(line.find(",bottom"), std::string::npos);
  std::getline(in, line);
  EXPECT_NE(line.find(",open_gap_left"), std::string::npos);
  std::getline(in, line);
  EXPECT_NE(line.find(",open_gap_right"), std::string::npos);
}

}  // namespace
