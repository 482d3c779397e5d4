#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spectral_decay/decay.hpp"

using namespace spectral_decay;

namespace {

std::vector<TailSample> floquet_like(double rate, double from, double to, double step) {
  std::vector<TailSample> s;
  for (double x = from; x <= to + 1e-12; x += step)
    s.push_back({x, std::exp(-rate * x) * (2.0 + std::cos(2 * std::numbers::pi * x))});
  return s;
}

TEST(FitDecayRate, RecoversRateThroughPeriodicFactor) {
  const auto s = floquet_like(0.7, 0.0, 30.0, 1.0 / 64);
  const auto fit = fit_decay_rate(s, 1.0, Side::kRight);
  EXPECT_NEAR(fit.delta_hat, 0.7, 1e-10);
  EXPECT_GT(fit.r_squared, 0.999999);
  EXPECT_GE(fit.points, kMinFitPoints);
}

TEST(FitDecayRate, LeftTail) {
  std::vector<TailSample> s;
  for (double x = -30.0; x <= 0.0; x += 0.125) s.push_back({x, std::exp(1.3 * x) * (1.5 + std::sin(2 * std::numbers::pi * x))});
  EXPECT_NEAR(fit_decay_rate(s, 1.0, Side::kLeft).delta_hat, 1.3, 1e-10);
}

TEST(FitDecayRate, SignedValuesUseModulus) {
  auto s = floquet_like(0.4, 0.0, 20.0, 0.25);
  for (std::size_t i = 0; i < s.size(); i += 2) s[i].value = -s[i].value;
  EXPECT_NEAR(fit_decay_rate(s, 1.0, Side::kRight, Window{0.0, 20.0}).delta_hat, 0.4, 1e-10);
}

TEST(FitDecayRate, ShortTail) {
  EXPECT_THROW(fit_decay_rate(floquet_like(1.0, 0.0, 5.0, 0.1), 1.0, Side::kRight), InsufficientTail);
  EXPECT_THROW(fit_decay_rate(std::vector<TailSample>{{0.0, 1.0}}, 1.0, Side::kRight), InsufficientTail);
}

TEST(FitDecayRate, NoisyTailRejected) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.01, 100.0);
  std::vector<TailSample> s;
  for (double x = 0; x <= 40; x += 0.5) s.push_back({x, u(rng)});
  EXPECT_THROW(fit_decay_rate(s, 1.0, Side::kRight), PoorFit);
}

TEST(BoundReport, HillGapPointBelowAgmonIsExpected) {
  const auto r = bound_report({.lambda = 14.7, .d_lambda = 3.17, .reference_rate = 0.502, .delta_hat = 0.502});
  EXPECT_EQ(r.floquet_match, Verdict::kPass);
  EXPECT_EQ(r.agmon_in_gap, Verdict::kExpectedFail);
  EXPECT_EQ(r.agmon_below_spectrum, Verdict::kNotApplicable);
  EXPECT_EQ(r.first_order_theorem, Verdict::kNotApplicable);
  EXPECT_FALSE(r.any_fail());
  EXPECT_STREQ(to_string(r.agmon_in_gap), "FAIL-in-gap (expected)");
}

TEST(BoundReport, BelowSpectrumAgmon) {
  const auto ok = bound_report({.d_lambda = 1.0, .reference_rate = 1.0, .delta_hat = 1.0, .below_spectrum = true});
  EXPECT_EQ(ok.agmon_below_spectrum, Verdict::kPass);
  const auto bad = bound_report({.d_lambda = 1.0, .reference_rate = 0.5, .delta_hat = 0.5, .below_spectrum = true});
  EXPECT_EQ(bad.agmon_below_spectrum, Verdict::kFail);
  EXPECT_TRUE(bad.any_fail());
}

TEST(BoundReport, FirstOrderRate) {
  const auto r = bound_report({.d_lambda = 0.2233, .gamma = 1.0, .reference_rate = 0.6298, .delta_hat = 0.6298,
                               .second_order = false});
  EXPECT_DOUBLE_EQ(r.first_order_rate, 0.2233);
  EXPECT_EQ(r.first_order_theorem, Verdict::kPass);
  EXPECT_EQ(r.agmon_in_gap, Verdict::kNotApplicable);
  const auto low = bound_report({.d_lambda = 1.0, .gamma = 2.0, .reference_rate = 0.3, .delta_hat = 0.3, .second_order = false});
  EXPECT_EQ(low.first_order_theorem, Verdict::kFail);
  EXPECT_THROW(bound_report({.d_lambda = -1.0}), ValidationError);
}

TEST(DiracRates, SharpRateDominatesGapDistance) {
  // sqrt(m^2 - l^2) >= m - |l| on (-m, m), with equality at l = 0
  for (double m : {0.5, 1.0, 3.0}) {
    for (int i = -99; i <= 99; ++i) {
      const double l = m * i / 100.0;
      EXPECT_GE(std::sqrt(m * m - l * l) + 1e-15, m - std::abs(l));
    }
  }
}

}  // namespace
