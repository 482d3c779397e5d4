#pragma once

// Empirical decay rates of eigenfunction tails and the bound bookkeeping that compares
// them with the Agmon rate sqrt(d), the first-order rate d/gamma and the exact tail rate.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spectral_decay/errors.hpp"

namespace spectral_decay {

/// (x, |psi(x)|) with |.| the modulus or the C^n norm.
struct TailSample {
  double x = 0.0;
  double value = 0.0;
};

enum class Side { kLeft, kRight };

struct Window {
  double start = 0.0;
  double end = 0.0;
};

struct DecayFit {
  double delta_hat = 0.0;
  double r_squared = 0.0;
  Window window;
  double sample_stride = 1.0;
  int points = 0;
};

inline constexpr double kMinRSquared = 0.999;
inline constexpr int kMinFitPoints = 8;

namespace detail {

// Linear interpolation of the samples at x (samples sorted by x).
inline double interpolate(std::span<const TailSample> s, double x) {
  auto it = std::lower_bound(s.begin(), s.end(), x, [](const TailSample& a, double v) { return a.x < v; });
  if (it == s.end()) return s.back().value;
  if (it->x == x || it == s.begin()) return it->value;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double t = (x - lo.x) / (hi.x - lo.x);
  return lo.value + t * (hi.value - lo.value);
}

}  // namespace detail

/// delta_hat = -slope of ln|psi| at abscissae spaced by one period, which cancels the
/// periodic factor of a Floquet tail. Without `window` the outer half of the samples on
/// the requested side is used.
inline DecayFit fit_decay_rate(std::span<const TailSample> samples, double period, Side side,
                               std::optional<Window> window = std::nullopt) {
  if (samples.size() < 2) throw InsufficientTail("need at least two samples");
  if (!(period > 0.0)) throw ValidationError("period must be positive");
  std::vector<TailSample> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end(), [](const TailSample& a, const TailSample& b) { return a.x < b.x; });
  const double x_min = s.front().x, x_max = s.back().x;

  Window w;
  if (window) {
    w = *window;
  } else if (side == Side::kRight) {
    w = {0.5 * (x_min + x_max), x_max};
  } else {
    w = {x_min, 0.5 * (x_min + x_max)};
  }
  w.start = std::max(w.start, x_min);
  w.end = std::min(w.end, x_max);
  if (!(w.end > w.start)) throw InsufficientTail("empty fit window");

  // Offset inside the first period (counted from the inner end) where |psi| is largest,
  // so period-spaced points avoid nodes of the periodic factor.
  const double inner = side == Side::kRight ? w.start : w.end;
  double offset = inner;
  double best = -1.0;
  for (const auto& p : s) {
    const bool in_first = side == Side::kRight ? (p.x >= inner && p.x < inner + period)
                                               : (p.x <= inner && p.x > inner - period);
    if (in_first && std::abs(p.value) > best) {
      best = std::abs(p.value);
      offset = p.x;
    }
  }

  std::vector<double> xs, ys;
  for (int k = 0;; ++k) {
    const double x = side == Side::kRight ? offset + k * period : offset - k * period;
    if (x > w.end + 1e-12 * period || x < w.start - 1e-12 * period) break;
    const double v = std::abs(detail::interpolate(s, x));
    if (!(v > 0.0) || !std::isfinite(v)) throw PoorFit("tail sample is zero or non-finite");
    xs.push_back(x);
    ys.push_back(std::log(v));
  }
  if (int(xs.size()) < kMinFitPoints)
    throw InsufficientTail("only " + std::to_string(xs.size()) + " period-spaced points in the window");

  const double n = double(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (my + slope * (xs[i] - mx));
    ss_res += r * r;
  }

  DecayFit fit;
  fit.delta_hat = side == Side::kRight ? -slope : slope;
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  fit.window = w;
  fit.sample_stride = period;
  fit.points = int(xs.size());
  if (fit.r_squared < kMinRSquared) throw PoorFit("r^2 = " + std::to_string(fit.r_squared));
  return fit;
}

// ---------------------------------------------------------------------------
// Bound bookkeeping
// ---------------------------------------------------------------------------

enum class Verdict { kPass, kFail, kExpectedFail, kWarn, kNotApplicable };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "PASS";
    case Verdict::kFail: return "FAIL";
    case Verdict::kExpectedFail: return "FAIL-in-gap (expected)";
    case Verdict::kWarn: return "WARN";
    case Verdict::kNotApplicable: return "N/A";
  }
  return "?";
}

struct BoundInputs {
  double lambda = 0.0;
  double d_lambda = 0.0;
  /// gamma of the first-order symbol; 0 for second-order (Hill) operators.
  double gamma = 0.0;
  /// Exact tail rate: ln rho(lambda) for Hill, sqrt(m^2 - lambda^2) for Dirac.
  double reference_rate = 0.0;
  double delta_hat = 0.0;
  /// lambda lies below the essential spectrum (Agmon regime).
  bool below_spectrum = false;
  bool second_order = true;
  double rel_tol = 0.01;
};

struct BoundReport {
  double lambda = 0.0;
  double d_lambda = 0.0;
  double gamma = 0.0;
  double agmon_rate = 0.0;
  double first_order_rate = 0.0;
  double floquet_rate = 0.0;
  double delta_hat = 0.0;
  Verdict floquet_match = Verdict::kNotApplicable;
  Verdict agmon_below_spectrum = Verdict::kNotApplicable;
  Verdict agmon_in_gap = Verdict::kNotApplicable;
  Verdict first_order_theorem = Verdict::kNotApplicable;

  bool any_fail() const {
    for (Verdict v : {floquet_match, agmon_below_spectrum, agmon_in_gap, first_order_theorem})
      if (v == Verdict::kFail) return true;
    return false;
  }
};

/// Verdicts are a pure function of the rates.
inline BoundReport bound_report(const BoundInputs& in) {
  if (in.d_lambda < 0.0 || in.reference_rate < 0.0 || in.gamma < 0.0)
    throw ValidationError("rates must be nonnegative");
  BoundReport r;
  r.lambda = in.lambda;
  r.d_lambda = in.d_lambda;
  r.gamma = in.gamma;
  r.agmon_rate = std::sqrt(in.d_lambda);
  r.first_order_rate = in.gamma > 0.0 ? in.d_lambda / in.gamma : 0.0;
  r.floquet_rate = in.reference_rate;
  r.delta_hat = in.delta_hat;

  r.floquet_match = std::abs(in.delta_hat - in.reference_rate) <= in.rel_tol * in.reference_rate ? Verdict::kPass
                                                                                                  : Verdict::kFail;
  if (in.second_order) {
    const double floor = r.agmon_rate * (1.0 - in.rel_tol);
    if (in.below_spectrum) {
      r.agmon_below_spectrum = in.delta_hat >= floor ? Verdict::kPass : Verdict::kFail;
    } else {
      r.agmon_in_gap = in.delta_hat >= floor ? Verdict::kPass : Verdict::kExpectedFail;
    }
  }
  if (in.gamma > 0.0) {
    r.first_order_theorem = in.delta_hat >= r.first_order_rate * (1.0 - in.rel_tol) ? Verdict::kPass : Verdict::kFail;
  }
  return r;
}

}  // namespace spectral_decay
