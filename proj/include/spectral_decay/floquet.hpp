#pragma once

// Hill discriminant, multiplicator and Floquet solutions y_+- = rho^{-+x} p_+-(x).

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "spectral_decay/ode.hpp"

namespace spectral_decay {

/// |F| - 1 at or below which a point is treated as lying on a band.
inline constexpr double kEdgeTolerance = 1e-9;

enum class PointKind { kRegular, kBand };
enum class Parity { kPeriodic, kAntiperiodic, kUndefinedAtBand };
/// y_+ decays at +infinity, y_- at -infinity.
enum class Branch { kPlus, kMinus };

struct FloquetData {
  double lambda = 0.0;
  double F = 0.0;
  double Fprime = 0.0;
  double rho = 1.0;
  PointKind kind = PointKind::kBand;
  Parity parity = Parity::kUndefinedAtBand;
  /// Cauchy data at x = 0, unit Euclidean norm, y(0) >= 0.
  State2 seed_plus;
  State2 seed_minus;

  /// sign(F)
  double sigma() const { return F < 0 ? -1.0 : 1.0; }
  /// Monodromy eigenvalue of the branch: y(x+1) = multiplier * y(x).
  double multiplier(Branch b) const { return b == Branch::kPlus ? sigma() / rho : sigma() * rho; }
  const State2& seed(Branch b) const { return b == Branch::kPlus ? seed_plus : seed_minus; }
  double log_rho() const { return std::log(rho); }

  /// W(y_-, y_+) = y_-' y_+ - y_- y_+'; positive for the free operator below zero.
  double wronskian() const { return seed_minus.yp * seed_plus.y - seed_minus.y * seed_plus.yp; }
};

/// rho = |F| + sqrt(F^2 - 1) for |F| >= 1, else 1.
inline double multiplicator(double F) {
  const double a = std::abs(F);
  if (a <= 1.0) return 1.0;
  // (a-1)(a+1) avoids cancellation in F^2 - 1 near the edge
  return a + std::sqrt((a - 1.0) * (a + 1.0));
}

/// ln rho computed without forming rho - 1 by subtraction.
inline double log_multiplicator(double F) {
  const double a = std::abs(F);
  if (a <= 1.0) return 0.0;
  return std::log1p((a - 1.0) + std::sqrt((a - 1.0) * (a + 1.0)));
}

/// F(lambda) = (phi'(1) + theta(1)) / 2.
template <HillCoefficient C>
double discriminant(const C& V, double lambda, const OdeOptions& opts = {}) {
  return monodromy(V, lambda, opts).half_trace();
}

/// dF/dlambda from the variational equations.
template <HillCoefficient C>
double discriminant_derivative(const C& V, double lambda, const OdeOptions& opts = {}) {
  return 0.5 * monodromy(V, lambda, opts, true).derivative.trace();
}

namespace detail {

inline State2 normalized_seed(Eigen::Vector2d v) {
  v.normalize();
  if (v(0) < 0.0 || (std::abs(v(0)) < 1e-15 && v(1) < 0.0)) v = -v;
  return State2::from(v);
}

// Eigenvector of a 2x2 matrix for a simple real eigenvalue mu.
inline Eigen::Vector2d eigenvector(const Eigen::Matrix2d& M, double mu) {
  const Eigen::Vector2d a(M(0, 1), mu - M(0, 0));
  const Eigen::Vector2d b(mu - M(1, 1), M(1, 0));
  return a.norm() >= b.norm() ? a : b;
}

}  // namespace detail

/// Discriminant data at lambda; seeds are filled only at regular points.
template <HillCoefficient C>
FloquetData classify(const C& V, double lambda, const OdeOptions& opts = {}) {
  const Monodromy M = monodromy(V, lambda, opts, true);
  FloquetData d;
  d.lambda = lambda;
  d.F = M.half_trace();
  d.Fprime = 0.5 * M.derivative.trace();
  d.rho = multiplicator(d.F);
  if (std::abs(d.F) - 1.0 <= kEdgeTolerance) {
    d.kind = PointKind::kBand;
    d.parity = Parity::kUndefinedAtBand;
    return d;
  }
  d.kind = PointKind::kRegular;
  d.parity = d.F > 0 ? Parity::kPeriodic : Parity::kAntiperiodic;
  d.seed_plus = detail::normalized_seed(detail::eigenvector(M.matrix, d.multiplier(Branch::kPlus)));
  d.seed_minus = detail::normalized_seed(detail::eigenvector(M.matrix, d.multiplier(Branch::kMinus)));
  return d;
}

/// Floquet data with eigenvector seeds; refuses band points.
template <HillCoefficient C>
FloquetData floquet_solutions(const C& V, double lambda, const OdeOptions& opts = {}) {
  FloquetData d = classify(V, lambda, opts);
  if (d.kind == PointKind::kBand)
    throw BandPointError("|F(lambda)| <= 1 + tol_edge at lambda = " + std::to_string(lambda));
  return d;
}

/// Values of the Floquet solution y_branch at the abscissae xs (any order), using
/// y(x + n) = multiplier^n y(x) and propagation within a single period.
template <HillCoefficient C>
std::vector<State2> floquet_values(const C& V, const FloquetData& data, Branch branch, const std::vector<double>& xs,
                                   const OdeOptions& opts = {}) {
  std::vector<State2> out(xs.size());
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> frac(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    frac[i] = xs[i] - std::floor(xs[i]);
    if (frac[i] >= 1.0) frac[i] = 0.0;
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] < frac[b]; });

  const double mult = data.multiplier(branch);
  State2 s = data.seed(branch);
  double t = 0.0;
  for (std::size_t idx : order) {
    s = propagate_hill(V, data.lambda, t, frac[idx], s, opts);
    t = frac[idx];
    const double scale = std::pow(mult, std::floor(xs[idx]));
    out[idx] = {scale * s.y, scale * s.yp};
  }
  return out;
}

template <HillCoefficient C>
State2 floquet_value(const C& V, const FloquetData& data, Branch branch, double x, const OdeOptions& opts = {}) {
  return floquet_values(V, data, branch, std::vector<double>{x}, opts).front();
}

}  // namespace spectral_decay
