#pragma once

// Band edges as roots of F^2 = 1, open gaps, bottom of the essential spectrum and the
// distance d(lambda) to it.

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "spectral_decay/floquet.hpp"
#include "spectral_decay/format.hpp"
#include "spectral_decay/parallel.hpp"

namespace spectral_decay {

struct Gap {
  double lower = 0.0;
  double upper = 0.0;

  double width() const { return upper - lower; }
  double midpoint() const { return 0.5 * (lower + upper); }
  bool contains(double lambda) const { return lambda > lower && lambda < upper; }
};

struct BandStructure {
  /// Strictly increasing: lambda0 first, then (lower, upper) of each open gap.
  std::vector<double> edges;
  std::vector<Gap> gaps;
  /// Critical points of F with |F| - 1 below the edge tolerance (zero-width gaps).
  std::vector<double> closed_gaps;
  double lambda0 = 0.0;
  double scan_ceiling = 0.0;
  /// Set when a grid cell could not be resolved into monotone pieces (ScanIncomplete).
  bool incomplete = false;
};

struct BandOptions {
  double grid_step = 0.05;
  /// Defaults to -max|V| - 1, below which F > 1.
  std::optional<double> lambda_min;
  /// Maximum dyadic subdivision depth for unresolved grid cells.
  int refine_depth = 12;
  OdeOptions ode;
};

namespace detail {

struct FSample {
  double lambda;
  double F;
  double dF;
};

template <HillCoefficient C>
FSample sample_F(const C& V, double lambda, const OdeOptions& opts) {
  const Monodromy M = monodromy(V, lambda, opts, true);
  return {lambda, M.half_trace(), 0.5 * M.derivative.trace()};
}

// Bisection on a sign change of f over [lo, hi], to a relative width of ~1e-15.
template <class Fn>
double bisect(const Fn& f, double lo, double hi, double f_lo) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (f_lo > 0)) {
      lo = mid;
      f_lo = fm;
    } else {
      hi = mid;
    }
    if (hi - lo <= 4e-16 * std::max(1.0, std::abs(mid))) break;
  }
  return 0.5 * (lo + hi);
}

// True when the cubic Hermite data on a cell cannot be monotone: the secant slope
// disagrees in sign with both endpoint derivatives.
inline bool hidden_extrema(const FSample& a, const FSample& b) {
  const double secant = (b.F - a.F) / (b.lambda - a.lambda);
  const bool same_end_signs = (a.dF > 0) == (b.dF > 0);
  return same_end_signs && secant != 0.0 && ((secant > 0) != (a.dF > 0));
}

}  // namespace detail

/// Locates band edges of -d^2/dx^2 + V on [lambda_min, lambda_max].
inline BandStructure band_edges(const PeriodicPotential& V, double lambda_max, const BandOptions& options = {}) {
  using detail::FSample;
  const double lo = options.lambda_min.value_or(-V.max_abs() - 1.0);
  if (!(lambda_max > lo)) throw ValidationError("lambda_max must exceed the scan floor");
  if (!(options.grid_step > 0.0)) throw ValidationError("grid_step must be positive");
  const OdeOptions& ode = options.ode;

  const auto cells = std::size_t(std::ceil((lambda_max - lo) / options.grid_step));
  std::vector<FSample> grid(cells + 1);
  parallel_for(grid.size(), [&](std::size_t i) {
    const double lambda = i == cells ? lambda_max : lo + double(i) * options.grid_step;
    grid[i] = detail::sample_F(V, lambda, ode);
  });

  BandStructure out;
  out.scan_ceiling = lambda_max;

  auto F = [&](double l) { return discriminant(V, l, ode); };
  auto dF = [&](double l) { return discriminant_derivative(V, l, ode); };

  // Critical points of F, i.e. sign changes of F', with dyadic refinement of cells that
  // hide a pair of extrema.
  std::vector<double> critical;
  auto scan_cell = [&](auto&& self, const FSample& a, const FSample& b, int depth) -> void {
    if ((a.dF > 0) != (b.dF > 0) || a.dF == 0.0) {
      if (a.dF == 0.0) {
        critical.push_back(a.lambda);
      } else {
        critical.push_back(detail::bisect(dF, a.lambda, b.lambda, a.dF));
      }
      return;
    }
    if (!detail::hidden_extrema(a, b)) return;
    if (depth >= options.refine_depth) {
      out.incomplete = true;
      return;
    }
    const FSample m = detail::sample_F(V, 0.5 * (a.lambda + b.lambda), ode);
    self(self, a, m, depth + 1);
    self(self, m, b, depth + 1);
  };
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) scan_cell(scan_cell, grid[i], grid[i + 1], 0);
  std::sort(critical.begin(), critical.end());
  critical.erase(std::unique(critical.begin(), critical.end()), critical.end());

  // Monotone segments between critical points.
  std::vector<double> seg{lo};
  seg.insert(seg.end(), critical.begin(), critical.end());
  seg.push_back(lambda_max);

  // Root of F - target on a monotone segment, polished with Newton steps.
  auto edge_on = [&](double a, double b, double target) -> std::optional<double> {
    const double fa = F(a) - target, fb = F(b) - target;
    if (fa == 0.0) return a;
    if ((fa > 0) == (fb > 0)) return std::nullopt;
    auto g = [&](double l) { return F(l) - target; };
    double r = detail::bisect(g, a, b, fa);
    for (int k = 0; k < 2; ++k) {
      const double d = dF(r);
      if (d == 0.0) break;
      const double next = r - g(r) / d;
      if (!(next > a && next < b)) break;
      if (std::abs(g(next)) > std::abs(g(r))) break;
      r = next;
    }
    return r;
  };

  if (F(lo) <= 1.0) throw ValidationError("F <= 1 at the scan floor; lower lambda_min");
  const auto bottom = edge_on(seg[0], seg[1], 1.0);
  if (!bottom) throw OutOfCertifiedRange("no band edge below lambda_max");
  out.lambda0 = *bottom;
  out.edges.push_back(out.lambda0);

  for (std::size_t k = 0; k < critical.size(); ++k) {
    const double c = critical[k];
    const double Fc = F(c);
    if (std::abs(Fc) - 1.0 <= kEdgeTolerance) {
      out.closed_gaps.push_back(c);
      continue;
    }
    const double target = Fc > 0 ? 1.0 : -1.0;
    const auto left = edge_on(seg[k], seg[k + 1], target);
    const auto right = edge_on(seg[k + 1], seg[k + 2], target);
    if (!right && k + 2 == seg.size() - 1) break;  // gap runs past the scan ceiling
    if (!left || !right) {
      out.incomplete = true;
      continue;
    }
    out.gaps.push_back({*left, *right});
    out.edges.push_back(*left);
    out.edges.push_back(*right);
  }
  return out;
}

/// d(lambda) = dist(lambda, sigma_ess).
inline double spectral_distance(const BandStructure& bands, double lambda) {
  if (!(lambda < bands.scan_ceiling))
    throw OutOfCertifiedRange("lambda beyond the certified scan ceiling");
  if (lambda < bands.lambda0) return bands.lambda0 - lambda;
  for (const Gap& g : bands.gaps) {
    if (g.contains(lambda)) return std::min(lambda - g.lower, g.upper - lambda);
  }
  return 0.0;
}

/// Gap containing lambda, if any.
inline std::optional<Gap> gap_containing(const BandStructure& bands, double lambda) {
  for (const Gap& g : bands.gaps)
    if (g.contains(lambda)) return g;
  return std::nullopt;
}

/// CSV with columns lambda_edge,kind.
inline void write_edges_csv(std::ostream& os, const BandStructure& bands) {
  os << "lambda_edge,kind\n";
  os << format_number(bands.lambda0) << ",bottom\n";
  for (const Gap& g : bands.gaps) {
    os << format_number(g.lower) << ",open_gap_left\n";
    os << format_number(g.upper) << ",open_gap_right\n";
  }
}

}  // namespace spectral_decay
