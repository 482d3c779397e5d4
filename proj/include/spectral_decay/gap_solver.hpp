#pragma once

// Eigenvalues of H_alpha = -d^2/dx^2 + V - alpha Q placed at a prescribed regular point
// lambda: by Floquet matching across supp Q, and by the Birman-Schwinger operator
// G (H - lambda)^{-1} G discretized with Nystrom.

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "spectral_decay/decay.hpp"
#include "spectral_decay/floquet.hpp"
#include "spectral_decay/format.hpp"
#include "spectral_decay/parallel.hpp"

namespace spectral_decay {

struct GapSolverOptions {
  OdeOptions ode;
  /// Eigenfunction sampling density; samples sit on the lattice k / samples_per_period.
  int samples_per_period = 64;
  /// Periods of tail kept on each side of supp Q; default makes rho^{-2N} < 1e-12.
  std::optional<int> padding_periods;
  double alpha_tol = 1e-10;
  /// Upper end of the geometric bracket search.
  double alpha_max = 1e4;
  int bs_nodes = 2048;
  /// Nyström size used for the bracket hint in solve_coupling.
  int hint_nodes = 256;
};

struct ProfileSample {
  double x = 0.0;
  double psi = 0.0;
  double dpsi = 0.0;
};

struct GapEigenpair {
  double lambda = 0.0;
  double alpha = 0.0;
  std::vector<ProfileSample> samples;
  /// psi = c_+ y_+ right of supp Q and c_- y_- left of it (seeds as in FloquetData).
  double c_plus = 0.0;
  double c_minus = 0.0;
  double fitted_delta = 0.0;
  double log_rho = 0.0;
  double sigma = 1.0;
  double support_lower = 0.0;
  double support_upper = 0.0;
  int padding_periods = 0;
  /// Relative size of the growing component left in the right-edge projection.
  double match_residual = 0.0;
};

struct BSSpectrum {
  double lambda = 0.0;
  /// Eigenvalues of G (H - lambda)^{-1} G, descending by |mu|.
  std::vector<double> mu;
  int grid_size = 0;

  /// Largest positive eigenvalue; its inverse is the smallest positive coupling.
  std::optional<double> mu_max() const {
    std::optional<double> best;
    for (double m : mu)
      if (m > 0 && (!best || m > *best)) best = m;
    return best;
  }
};

/// Matching data for fixed (V, Q, lambda); reused across couplings alpha.
class GapProblem {
 public:
  GapProblem(const PeriodicPotential& V, const CompactPerturbation& Q, double lambda, GapSolverOptions opts = {})
      : V_(V), Q_(Q), lambda_(lambda), opts_(std::move(opts)) {
    floquet_ = floquet_solutions(V_, lambda_, opts_.ode);
    wronskian_ = floquet_.wronskian();
    if (!(std::abs(wronskian_) > 1e-14)) throw SingularWronskian("Floquet solutions are not independent");
    left_minus_ = floquet_value(V_, floquet_, Branch::kMinus, Q_.lower(), opts_.ode);
    const auto right = floquet_values(V_, floquet_, Branch::kPlus, {Q_.upper()}, opts_.ode);
    right_plus_ = right.front();
    right_minus_ = floquet_value(V_, floquet_, Branch::kMinus, Q_.upper(), opts_.ode);
  }

  double lambda() const { return lambda_; }
  const FloquetData& floquet() const { return floquet_; }
  const GapSolverOptions& options() const { return opts_; }

  /// Solution equal to y_- left of supp Q, propagated through it with coupling alpha.
  State2 matched_state(double alpha) const {
    const CoupledPotential U{V_, Q_, alpha};
    return propagate_hill(U, lambda_, Q_.lower(), Q_.upper(), left_minus_, opts_.ode);
  }

  /// W(u, y_+)(b) / W(y_-, y_+); equals 1 at alpha = 0 and vanishes iff lambda is an
  /// eigenvalue of H_alpha.
  double determinant(double alpha) const {
    const State2 u = matched_state(alpha);
    return (u.yp * right_plus_.y - u.y * right_plus_.yp) / wronskian_;
  }

  /// Root of the determinant in [lo, hi] to |d alpha| <= alpha_tol.
  double solve_in(double lo, double hi) const {
    double f_lo = determinant(lo);
    const double f_hi = determinant(hi);
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    if ((f_lo > 0) == (f_hi > 0)) throw NoSignChange("matching determinant keeps its sign on the bracket");
    while (hi - lo > opts_.alpha_tol) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double fm = determinant(mid);
      if (fm == 0.0) return mid;
      if ((fm > 0) == (f_lo > 0)) {
        lo = mid;
        f_lo = fm;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }

  /// Smallest positive coupling found by bracket search (hint from Birman-Schwinger, then
  /// geometric expansion from [0.1, 1] up to alpha_max).
  double solve_coupling(std::optional<std::pair<double, double>> bracket = std::nullopt) const {
    if (bracket) return solve_in(bracket->first, bracket->second);
    const auto grid = coupling_grid();
    if (const auto hint = birman_schwinger(opts_.hint_nodes).mu_max()) {
      const double a = 1.0 / *hint;
      const double lo = 0.97 * a, hi = 1.03 * a;
      // the hint bracket must hold the first crossing: no sign change below it
      if (determinant(lo) > 0 && determinant(hi) < 0) return solve_in(lo, hi);
    }
    double prev = 0.0, f_prev = 1.0;
    for (double a : grid) {
      const double fa = determinant(a);
      if ((fa > 0) != (f_prev > 0)) return solve_in(prev, a);
      prev = a;
      f_prev = fa;
    }
    throw NoSignChange("no coupling in (0, " + format_number(opts_.alpha_max) + "] places lambda in the spectrum");
  }

  /// Nyström discretization of the kernel G(x) g(x,x') G(x') on supp Q with the trapezoid
  /// rule; g = y_-(min) y_+(max) / W(y_-, y_+) is the Green kernel of H - lambda.
  BSSpectrum birman_schwinger(int nodes) const {
    if (nodes < 2) throw ValidationError("Birman-Schwinger grid needs at least two nodes");
    const double a = Q_.lower(), b = Q_.upper();
    const double h = (b - a) / double(nodes - 1);
    std::vector<double> xs(static_cast<std::size_t>(nodes));
    for (int i = 0; i < nodes; ++i) xs[std::size_t(i)] = i + 1 == nodes ? b : a + h * double(i);
    const auto ym = floquet_values(V_, floquet_, Branch::kMinus, xs, opts_.ode);
    const auto yp = floquet_values(V_, floquet_, Branch::kPlus, xs, opts_.ode);
    Eigen::VectorXd scale(nodes);
    for (int i = 0; i < nodes; ++i) {
      const double w = (i == 0 || i + 1 == nodes) ? 0.5 * h : h;
      scale(i) = std::sqrt(w) * Q_.G(xs[std::size_t(i)]);
    }
    Eigen::MatrixXd K(nodes, nodes);
    parallel_for(std::size_t(nodes), [&](std::size_t i) {
      for (std::size_t j = 0; j <= i; ++j) {
        // j <= i: x_j is the smaller abscissa
        const double g = ym[j].y * yp[i].y / wronskian_;
        K(Eigen::Index(i), Eigen::Index(j)) = scale(Eigen::Index(i)) * g * scale(Eigen::Index(j));
      }
    });
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K, Eigen::EigenvaluesOnly);
    BSSpectrum out;
    out.lambda = lambda_;
    out.grid_size = nodes;
    out.mu.assign(es.eigenvalues().data(), es.eigenvalues().data() + nodes);
    std::stable_sort(out.mu.begin(), out.mu.end(), [](double p, double q) { return std::abs(p) > std::abs(q); });
    return out;
  }

  /// Eigenfunction of H_alpha at lambda, normalized over the whole line.
  GapEigenpair eigenfunction(double alpha) const {
    const double a = Q_.lower(), b = Q_.upper();
    const double log_rho = floquet_.log_rho();
    const int pad = opts_.padding_periods.value_or(
        std::clamp(int(std::ceil(std::log(1e12) / (2.0 * log_rho))), 10, 4000));
    const double step = 1.0 / double(opts_.samples_per_period);

    // projection of u(b) on (y_+, y_-)
    const State2 ub = matched_state(alpha);
    Eigen::Matrix2d basis;
    basis << right_plus_.y, right_minus_.y, right_plus_.yp, right_minus_.yp;
    const Eigen::Vector2d coef = basis.lu().solve(ub.vec());
    const double c_plus = coef(0);
    const double c_minus = 1.0;
    const double residual =
        std::abs(coef(1)) * right_minus_.vec().norm() / std::max(ub.vec().norm(), std::abs(c_plus) * right_plus_.vec().norm());
    if (!std::isfinite(c_plus) || std::abs(c_plus) + std::abs(c_minus) < 1e-300)
      throw DegenerateMatch("tail coefficients vanish");
    if (residual > 1e-6) throw DegenerateMatch("alpha does not place lambda in the spectrum (growing tail)");

    const auto k_lo = long(std::floor((a - pad) / step));
    const auto k_a = long(std::floor(a / step));
    const auto k_b = long(std::ceil(b / step));
    const auto k_hi = long(std::ceil((b + pad) / step));

    std::vector<double> left_x, mid_x{a}, right_x;
    for (long k = k_lo; k <= k_a; ++k) left_x.push_back(double(k) * step);
    for (long k = k_a + 1; k < k_b; ++k)
      if (double(k) * step > a && double(k) * step < b) mid_x.push_back(double(k) * step);
    mid_x.push_back(b);
    for (long k = k_b; k <= k_hi; ++k) right_x.push_back(double(k) * step);

    std::vector<ProfileSample> samples;
    const auto left = floquet_values(V_, floquet_, Branch::kMinus, left_x, opts_.ode);
    for (std::size_t i = 0; i < left_x.size(); ++i)
      if (left_x[i] < a) samples.push_back({left_x[i], c_minus * left[i].y, c_minus * left[i].yp});
    const CoupledPotential U{V_, Q_, alpha};
    const auto inside = propagate_hill_samples(U, lambda_, mid_x, left_minus_, opts_.ode);
    for (std::size_t i = 0; i < mid_x.size(); ++i) samples.push_back({mid_x[i], inside[i].y, inside[i].yp});
    const auto right = floquet_values(V_, floquet_, Branch::kPlus, right_x, opts_.ode);
    for (std::size_t i = 0; i < right_x.size(); ++i)
      if (right_x[i] > b) samples.push_back({right_x[i], c_plus * right[i].y, c_plus * right[i].yp});

    // whole-line L2 norm: trapezoid over the window plus geometric tails beyond it
    double norm2 = 0.0;
    for (std::size_t i = 1; i < samples.size(); ++i)
      norm2 += 0.5 * (samples[i].x - samples[i - 1].x) * (samples[i].psi * samples[i].psi + samples[i - 1].psi * samples[i - 1].psi);
    const double q = std::exp(-2.0 * log_rho);
    auto period_mass = [&](double from, double to) {
      double m = 0.0;
      for (std::size_t i = 1; i < samples.size(); ++i) {
        if (samples[i - 1].x >= from - 1e-12 && samples[i].x <= to + 1e-12)
          m += 0.5 * (samples[i].x - samples[i - 1].x) * (samples[i].psi * samples[i].psi + samples[i - 1].psi * samples[i - 1].psi);
      }
      return m;
    };
    const double x_first = samples.front().x, x_last = samples.back().x;
    norm2 += q / (1.0 - q) * (period_mass(x_first, x_first + 1.0) + period_mass(x_last - 1.0, x_last));
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& s : samples) {
      s.psi *= inv;
      s.dpsi *= inv;
    }

    GapEigenpair out;
    out.lambda = lambda_;
    out.alpha = alpha;
    out.c_plus = c_plus * inv;
    out.c_minus = c_minus * inv;
    out.log_rho = log_rho;
    out.sigma = floquet_.sigma();
    out.support_lower = a;
    out.support_upper = b;
    out.padding_periods = pad;
    out.match_residual = residual;
    std::vector<TailSample> tail;
    for (const auto& s : samples)
      if (s.x >= b + 1.0) tail.push_back({s.x, s.psi});
    out.samples = std::move(samples);
    out.fitted_delta = fit_decay_rate(tail, 1.0, Side::kRight, Window{b + 1.0, tail.back().x}).delta_hat;
    return out;
  }

 private:
  std::vector<double> coupling_grid() const {
    std::vector<double> g;
    constexpr int kPerDecade = 16;
    for (int k = 0;; ++k) {
      const double a = 0.1 * std::pow(10.0, double(k) / kPerDecade);
      if (a > opts_.alpha_max * (1.0 + 1e-12)) break;
      g.push_back(a);
    }
    return g;
  }

  PeriodicPotential V_;
  CompactPerturbation Q_;
  double lambda_;
  GapSolverOptions opts_;
  FloquetData floquet_;
  double wronskian_ = 0.0;
  State2 left_minus_;
  State2 right_plus_;
  State2 right_minus_;
};

// Free-function surface.

inline double matching_determinant(const PeriodicPotential& V, const CompactPerturbation& Q, double alpha,
                                   double lambda, const GapSolverOptions& opts = {}) {
  return GapProblem(V, Q, lambda, opts).determinant(alpha);
}

inline double solve_coupling(const PeriodicPotential& V, const CompactPerturbation& Q, double lambda,
                             std::optional<std::pair<double, double>> alpha_bracket = std::nullopt,
                             const GapSolverOptions& opts = {}) {
  return GapProblem(V, Q, lambda, opts).solve_coupling(alpha_bracket);
}

inline BSSpectrum birman_schwinger_spectrum(const PeriodicPotential& V, const CompactPerturbation& Q, double lambda,
                                            int grid_size = 2048, const GapSolverOptions& opts = {}) {
  return GapProblem(V, Q, lambda, opts).birman_schwinger(grid_size);
}

inline GapEigenpair eigenfunction(const PeriodicPotential& V, const CompactPerturbation& Q, double alpha,
                                  double lambda, const GapSolverOptions& opts = {}) {
  return GapProblem(V, Q, lambda, opts).eigenfunction(alpha);
}

/// Fixed-alpha counterpart: lambda in (lo, hi) with det = 0, by bisection in lambda.
inline double solve_eigenvalue(const PeriodicPotential& V, const CompactPerturbation& Q, double alpha, double lo,
                               double hi, const GapSolverOptions& opts = {}) {
  auto f = [&](double l) { return GapProblem(V, Q, l, opts).determinant(alpha); };
  double f_lo = f(lo);
  if ((f_lo > 0) == (f(hi) > 0)) throw NoSignChange("matching determinant keeps its sign on the lambda bracket");
  while (hi - lo > 1e-12 * std::max(1.0, std::abs(lo))) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0) == (f_lo > 0)) {
      lo = mid;
      f_lo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// CSV with columns x,psi.
inline void write_eigenpair_csv(std::ostream& os, const GapEigenpair& e) {
  os << "x,psi\n";
  for (const auto& s : e.samples) os << format_number(s.x) << ',' << format_number(s.psi) << '\n';
}

inline nlohmann::json summary_json(const GapEigenpair& e) {
  return {{"lambda", e.lambda},   {"alpha", e.alpha},
          {"c_plus", e.c_plus},   {"c_minus", e.c_minus},
          {"fitted_delta", e.fitted_delta}, {"ln_rho", e.log_rho}};
}

}  // namespace spectral_decay
