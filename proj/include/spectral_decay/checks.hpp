#pragma once

// Numerical checks of the Hill-operator estimates: ln^2 rho >= lambda0 - lambda below the
// spectrum, the edge law ln^2 rho ~ 2|F'(edge)| |lambda - edge|, the large-lambda law
// F' = -sin(sqrt l)/(2 sqrt l) + O(1/l), and the search for gap points whose Floquet rate
// falls below eps * sqrt(d(lambda)).

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "spectral_decay/bands.hpp"
#include "spectral_decay/decay.hpp"
#include "spectral_decay/floquet.hpp"
#include "spectral_decay/gap_solver.hpp"

namespace spectral_decay {

// ---------------------------------------------------------------------------
// ln^2 rho >= lambda0 - lambda
// ---------------------------------------------------------------------------

struct PropHResult {
  double worst_margin = 0.0;
  double worst_lambda = 0.0;
  bool pass = false;
};

inline constexpr double kPropHTol = 1e-8;

/// min over the grid of ln^2 rho(lambda) - (lambda0 - lambda); grid points must lie below lambda0.
inline PropHResult check_prop_H(const PeriodicPotential& V, double lambda0, const std::vector<double>& lambdas,
                                const OdeOptions& ode = {}) {
  if (lambdas.empty()) throw ValidationError("empty lambda grid");
  PropHResult r;
  r.worst_margin = std::numeric_limits<double>::infinity();
  for (double l : lambdas) {
    if (l > lambda0) throw ValidationError("grid points must lie at or below lambda0");
    const double lr = log_multiplicator(discriminant(V, l, ode));
    const double margin = lr * lr - (lambda0 - l);
    if (margin < r.worst_margin) {
      r.worst_margin = margin;
      r.worst_lambda = l;
    }
  }
  r.pass = r.worst_margin >= -kPropHTol;
  return r;
}

// ---------------------------------------------------------------------------
// Edge asymptotics
// ---------------------------------------------------------------------------

struct EdgeAsymptotics {
  /// Edge after high-precision Newton polishing.
  double edge = 0.0;
  double Fprime_edge = 0.0;
  std::vector<double> lambdas;
  std::vector<double> ratios;
  double extrapolated = 0.0;
  bool pass = false;
};

inline constexpr double kEdgeRatioTol = 1e-3;

/// lambda_k = edge + side * 4^{-k} * width, k = 1..count.
inline std::vector<double> approach_grid(double edge, double width, double side, int count = 10) {
  std::vector<double> g;
  for (int k = 1; k <= count; ++k) g.push_back(edge + side * std::pow(4.0, -k) * width);
  return g;
}

/// Newton polish of a band edge on F = +-1 at the given tolerance.
template <HillCoefficient C>
double polish_edge(const C& V, double edge, const OdeOptions& ode) {
  for (int it = 0; it < 8; ++it) {
    const Monodromy M = monodromy(V, edge, ode, true);
    const double F = M.half_trace(), dF = 0.5 * M.derivative.trace();
    const double target = F > 0 ? 1.0 : -1.0;
    if (dF == 0.0) break;
    const double step = (F - target) / dF;
    edge -= step;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(edge))) break;
  }
  return edge;
}

/// Ratios ln^2 rho(lambda) / (2 |F'(edge)| |lambda - edge|) along `lambdas`, extrapolated to
/// the edge by a least-squares fit in h = sqrt|lambda - edge| (ratio = L + c1 h + c2 h^2).
template <HillCoefficient C>
EdgeAsymptotics check_edge_asymptotics(const C& V, double edge, const std::vector<double>& lambdas,
                                       OdeOptions ode = {}) {
  ode.tol = std::min(ode.tol, 1e-13);
  if (lambdas.size() < 3) throw InsufficientApproach("need at least three approach points");
  const double side = lambdas.front() > edge ? 1.0 : -1.0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double dist = (lambdas[i] - edge) * side;
    if (!(dist > 0)) throw InsufficientApproach("approach points must stay on one side of the edge");
    if (i > 0 && !(dist < (lambdas[i - 1] - edge) * side))
      throw InsufficientApproach("approach points must move monotonically toward the edge");
  }
  const double first = std::abs(lambdas.front() - edge), last = std::abs(lambdas.back() - edge);
  if (!(last < 1e-2 * first)) throw InsufficientApproach("grid does not approach the edge");

  EdgeAsymptotics r;
  r.edge = polish_edge(V, edge, ode);
  r.Fprime_edge = discriminant_derivative(V, r.edge, ode);
  if (!(std::abs(r.Fprime_edge) > 1e-12)) throw ClosedGap("F'(edge) vanishes; the gap is closed");
  r.lambdas = lambdas;

  Eigen::MatrixXd A(Eigen::Index(lambdas.size()), 3);
  Eigen::VectorXd b(Eigen::Index(lambdas.size()));
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double dist = std::abs(lambdas[i] - r.edge);
    const double lr = log_multiplicator(discriminant(V, lambdas[i], ode));
    const double ratio = lr * lr / (2.0 * std::abs(r.Fprime_edge) * dist);
    r.ratios.push_back(ratio);
    const double h = std::sqrt(dist / std::abs(lambdas.front() - r.edge));
    A.row(Eigen::Index(i)) << 1.0, h, h * h;
    b(Eigen::Index(i)) = ratio;
  }
  r.extrapolated = A.colPivHouseholderQr().solve(b)(0);
  r.pass = std::abs(r.extrapolated - 1.0) <= kEdgeRatioTol;
  return r;
}

// ---------------------------------------------------------------------------
// F' at large lambda
// ---------------------------------------------------------------------------

/// Median of pairwise slopes.
inline double theil_sen_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> slopes;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j)
      if (x[j] != x[i]) slopes.push_back((y[j] - y[i]) / (x[j] - x[i]));
  if (slopes.empty()) return 0.0;
  const auto mid = slopes.begin() + std::ptrdiff_t(slopes.size() / 2);
  std::nth_element(slopes.begin(), mid, slopes.end());
  if (slopes.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(slopes.begin(), mid);
  return 0.5 * (lower + upper);
}

struct FPrimeAsymptotics {
  std::vector<double> lambdas;
  /// lambda * |F'(lambda) + sin(sqrt lambda) / (2 sqrt lambda)|
  std::vector<double> residuals;
  /// Theil-Sen slope of log residual against log lambda (0 when the residual vanishes).
  double slope = 0.0;
  double max_residual = 0.0;
  bool pass = false;
};

inline constexpr double kSlopeTol = 0.05;

template <HillCoefficient C>
FPrimeAsymptotics check_F_prime_asymptotics(const C& V, const std::vector<double>& lambdas, const OdeOptions& ode = {}) {
  FPrimeAsymptotics r;
  r.lambdas = lambdas;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double l = lambdas[i];
    if (!(l > 0) || (i > 0 && !(l > lambdas[i - 1])))
      throw ValidationError("lambda grid must be positive and increasing");
    const double s = std::sqrt(l);
    const double res = l * std::abs(discriminant_derivative(V, l, ode) + std::sin(s) / (2.0 * s));
    r.residuals.push_back(res);
    r.max_residual = std::max(r.max_residual, res);
  }
  // Residuals at round-off level carry no trend.
  const double floor = 1e-9 * std::max(1.0, r.max_residual);
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (r.residuals[i] > floor) {
      lx.push_back(std::log(lambdas[i]));
      ly.push_back(std::log(r.residuals[i]));
    }
  }
  r.slope = lx.size() >= 2 ? theil_sen_slope(lx, ly) : 0.0;
  r.pass = r.slope <= kSlopeTol;
  return r;
}

/// count points log-spaced on [lo, hi].
inline std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> g;
  for (int i = 0; i < count; ++i) g.push_back(lo * std::pow(hi / lo, double(i) / double(count - 1)));
  return g;
}

inline std::vector<double> linear_grid(double lo, double hi, int count) {
  std::vector<double> g;
  for (int i = 0; i < count; ++i) g.push_back(lo + (hi - lo) * double(i) / double(count - 1));
  return g;
}

// ---------------------------------------------------------------------------
// Counterexample regime
// ---------------------------------------------------------------------------

struct GapRatio {
  int gap_index = 0;  // 1-based
  Gap gap;
  double lambda = 0.0;
  double log_rho = 0.0;
  double d_lambda = 0.0;
  /// ln rho / sqrt(d)
  double ratio = 0.0;
};

struct CounterexampleWitness {
  GapRatio point;
  /// Materialized eigenpair of H_alpha with Q on [0,1].
  std::optional<double> alpha;
  std::optional<double> delta_hat;
  bool verified = false;
};

struct CounterexampleResult {
  /// Midpoint ratios of every certified gap up to max_gap_index.
  std::vector<GapRatio> trace;
  /// Adjacent increases r_{n+1} > r_n.
  int inversions = 0;
  std::optional<CounterexampleWitness> witness;  // empty: NotFound
};

struct CounterexampleOptions {
  bool materialize = true;
  /// Coupling profile support for the materialization step.
  double support_lower = 0.0;
  double support_upper = 1.0;
  double grid_step = 0.05;
  GapSolverOptions solver;
};

/// Ratio at lambda inside a gap of `bands`.
inline GapRatio gap_ratio(const PeriodicPotential& V, const BandStructure& bands, int index, double lambda,
                          const OdeOptions& ode = {}) {
  GapRatio g;
  g.gap_index = index;
  g.gap = bands.gaps[std::size_t(index - 1)];
  g.lambda = lambda;
  g.log_rho = log_multiplicator(discriminant(V, lambda, ode));
  g.d_lambda = spectral_distance(bands, lambda);
  g.ratio = g.log_rho / std::sqrt(g.d_lambda);
  return g;
}

/// First gap (and point in it) with ln rho(lambda) < eps sqrt(d(lambda)); midpoints first, then
/// the approach grid toward either edge.
inline CounterexampleResult counterexample_search(const PeriodicPotential& V, double eps, int max_gap_index,
                                                  const CounterexampleOptions& opts = {}) {
  if (!(eps > 0)) throw ValidationError("eps must be positive");
  if (max_gap_index < 1) throw ValidationError("max_gap_index must be positive");
  const double n1 = double(max_gap_index + 1);
  const double lambda_max = std::pow(std::numbers::pi * n1, 2) + 2.0 * V.max_abs() + 1.0;
  BandOptions bo;
  bo.grid_step = opts.grid_step;
  bo.ode = opts.solver.ode;
  const BandStructure bands = band_edges(V, lambda_max, bo);

  CounterexampleResult r;
  const int count = std::min<int>(max_gap_index, int(bands.gaps.size()));
  for (int n = 1; n <= count; ++n) {
    r.trace.push_back(gap_ratio(V, bands, n, bands.gaps[std::size_t(n - 1)].midpoint(), opts.solver.ode));
    if (n > 1 && r.trace.back().ratio > r.trace[r.trace.size() - 2].ratio) ++r.inversions;
  }

  std::optional<GapRatio> hit;
  for (const auto& g : r.trace) {
    if (g.ratio < eps) {
      hit = g;
      break;
    }
    // lower edge approached from above, upper edge from below
    for (const auto& [edge, side] : {std::pair{g.gap.lower, 1.0}, std::pair{g.gap.upper, -1.0}}) {
      for (double l : approach_grid(edge, 0.5 * g.gap.width(), side, 10)) {
        const auto c = gap_ratio(V, bands, g.gap_index, l, opts.solver.ode);
        if (c.ratio < eps) {
          hit = c;
          break;
        }
      }
      if (hit) break;
    }
    if (hit) break;
  }
  if (!hit) return r;

  CounterexampleWitness w;
  w.point = *hit;
  if (opts.materialize) {
    const auto Q = CompactPerturbation::indicator(opts.support_lower, opts.support_upper);
    const GapProblem problem(V, Q, hit->lambda, opts.solver);
    w.alpha = problem.solve_coupling();
    const GapEigenpair e = problem.eigenfunction(*w.alpha);
    w.delta_hat = e.fitted_delta;
    w.verified = *w.delta_hat < eps * std::sqrt(hit->d_lambda);
  }
  r.witness = w;
  return r;
}

}  // namespace spectral_decay
