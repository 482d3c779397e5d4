#pragma once

// Propagation of the Hill equation  -y'' + U(x) y = lambda y  and of the 1D Dirac system
//   -i sigma_1 psi' + m sigma_3 psi + W psi = lambda psi.
//
// Smooth coefficients go through an adaptive Dormand-Prince 5(4) integrator; piecewise
// constant Hill coefficients use exact cos/cosh transfer matrices on each piece.

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "spectral_decay/errors.hpp"
#include "spectral_decay/potential.hpp"

namespace spectral_decay {

inline constexpr double kDefaultTol = 1e-10;

/// Value and derivative of a Hill solution.
struct State2 {
  double y = 0.0;
  double yp = 0.0;

  Eigen::Vector2d vec() const { return {y, yp}; }
  static State2 from(const Eigen::Vector2d& v) { return {v(0), v(1)}; }
};

/// Two complex spinor components.
using SpinorState = Eigen::Vector2cd;

/// Monodromy M(lambda): columns (theta(1), theta'(1)) and (phi(1), phi'(1)).
struct Monodromy {
  Eigen::Matrix2d matrix = Eigen::Matrix2d::Identity();
  /// dM/dlambda; filled only when requested.
  Eigen::Matrix2d derivative = Eigen::Matrix2d::Zero();

  double theta() const { return matrix(0, 0); }
  double theta_prime() const { return matrix(1, 0); }
  double phi() const { return matrix(0, 1); }
  double phi_prime() const { return matrix(1, 1); }
  double det() const { return matrix.determinant(); }
  double half_trace() const { return 0.5 * matrix.trace(); }
};

struct OdeOptions {
  double tol = kDefaultTol;
  /// Ignore the closed-form fast path for piecewise-constant coefficients.
  bool force_runge_kutta = false;
  long max_steps = 2'000'000;
};

/// Coefficient U(x) of the Hill equation: evaluable, with known jump locations.
template <class C>
concept HillCoefficient = requires(const C& c, double x) {
  { c(x) } -> std::convertible_to<double>;
  { c.breakpoints_in(x, x) } -> std::convertible_to<std::vector<double>>;
  { c.is_piecewise_constant() } -> std::convertible_to<bool>;
};

/// U(x) = V(x) - alpha Q(x).
struct CoupledPotential {
  const PeriodicPotential& V;
  const CompactPerturbation& Q;
  double alpha = 0.0;

  double operator()(double x) const { return V(x) - alpha * Q(x); }

  std::vector<double> breakpoints_in(double x0, double x1) const {
    auto out = V.breakpoints_in(x0, x1);
    auto q = Q.breakpoints_in(x0, x1);
    out.insert(out.end(), q.begin(), q.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  bool is_piecewise_constant() const { return V.is_piecewise_constant() && Q.is_piecewise_constant(); }
};

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)
// ---------------------------------------------------------------------------

/// Adaptive embedded RK 5(4) on a smooth interval [x0, x1] (x1 < x0 allowed).
/// `h` carries the step-size guess in and out so consecutive calls can chain.
template <class Vec, class Rhs>
Vec dopri5(const Rhs& rhs, double x0, double x1, Vec y, double tol, double& h, long max_steps = 2'000'000) {
  if (!(tol > 0.0)) throw StepFailure("tolerance must be positive");
  const double span = x1 - x0;
  if (span == 0.0) return y;
  const double dir = span > 0 ? 1.0 : -1.0;

  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  double step = std::abs(h);
  if (!(step > 0.0) || step > std::abs(span)) step = std::min(std::abs(span), 0.01);
  const double min_step = 1e-14 * std::max(1.0, std::max(std::abs(x0), std::abs(x1)));

  double x = x0;
  Vec k1 = rhs(x, y);
  for (long n = 0; n < max_steps; ++n) {
    const double remaining = (x1 - x) * dir;
    if (remaining <= 0.0) {
      h = step;
      return y;
    }
    bool last = false;
    double hs = step;
    if (hs >= remaining) {
      hs = remaining;
      last = true;
    }
    const double hh = hs * dir;
    const Vec k2 = rhs(x + c2 * hh, Vec(y + hh * (a21 * k1)));
    const Vec k3 = rhs(x + c3 * hh, Vec(y + hh * (a31 * k1 + a32 * k2)));
    const Vec k4 = rhs(x + c4 * hh, Vec(y + hh * (a41 * k1 + a42 * k2 + a43 * k3)));
    const Vec k5 = rhs(x + c5 * hh, Vec(y + hh * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
    const Vec k6 = rhs(x + hh, Vec(y + hh * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
    const Vec y_new = y + hh * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vec k7 = rhs(x + hh, y_new);
    const Vec err = hh * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err_norm = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double scale = tol + tol * std::max(std::abs(y(i)), std::abs(y_new(i)));
      err_norm = std::max(err_norm, std::abs(err(i)) / scale);
    }
    if (!std::isfinite(err_norm)) throw StepFailure("non-finite state during integration");

    if (err_norm <= 1.0) {
      x = last ? x1 : x + hh;
      y = y_new;
      k1 = k7;
      const double grow = err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
      if (!last) step = hs * grow;
    } else {
      step = hs * std::clamp(0.9 * std::pow(err_norm, -0.2), 0.1, 0.9);
      if (step < min_step) throw StepFailure("step size underflow");
    }
  }
  throw StepFailure("maximum number of steps exceeded");
}

// ---------------------------------------------------------------------------
// Hill transfer matrices
// ---------------------------------------------------------------------------

/// Transfer matrix across [x0, x1] and its lambda-derivative.
struct Transfer {
  Eigen::Matrix2d matrix = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d derivative = Eigen::Matrix2d::Zero();
};

namespace detail {

/// Exact transfer of y'' = q y over length h (h may be negative), with d/dlambda = -d/dq.
inline Transfer constant_piece(double q, double h) {
  const double z = q * h * h;
  double c, s, dc, ds;  // C, S and their q-derivatives
  if (std::abs(z) < 0.5) {
    // C = sum z^n/(2n)!, S = h sum z^n/(2n+1)!
    double term_c = 1.0, term_s = 1.0;
    c = 1.0;
    s = 1.0;
    dc = 0.0;
    ds = 0.0;
    for (int n = 1; n < 30; ++n) {
      term_c *= z / double((2 * n - 1) * (2 * n));
      term_s *= z / double((2 * n) * (2 * n + 1));
      c += term_c;
      s += term_s;
      // d/dq of z^n = n z^n / q, expressed without dividing by q
      dc += double(n) * term_c / z * h * h;
      ds += double(n) * term_s / z * h * h;
      if (std::abs(term_c) < 1e-18 && std::abs(term_s) < 1e-18) break;
    }
    if (z == 0.0) {
      dc = h * h / 2.0;
      ds = h * h / 6.0;
    }
    s *= h;
    ds *= h;
  } else if (q > 0) {
    const double k = std::sqrt(q);
    c = std::cosh(k * h);
    s = std::sinh(k * h) / k;
    dc = h * s / 2.0;
    ds = (h * c - s) / (2.0 * q);
  } else {
    const double k = std::sqrt(-q);
    c = std::cos(k * h);
    s = std::sin(k * h) / k;
    dc = h * s / 2.0;
    ds = (h * c - s) / (2.0 * q);
  }
  Transfer t;
  t.matrix << c, s, q * s, c;
  // d(qS)/dq = S + q dS/dq
  t.derivative << -dc, -ds, -(s + q * ds), -dc;
  return t;
}

template <HillCoefficient C>
std::vector<double> segment_points(const C& U, double x0, double x1) {
  std::vector<double> pts;
  pts.push_back(x0);
  if (x1 > x0) {
    for (double b : U.breakpoints_in(x0, x1)) pts.push_back(b);
  } else {
    auto br = U.breakpoints_in(x1, x0);
    for (auto it = br.rbegin(); it != br.rend(); ++it) pts.push_back(*it);
  }
  pts.push_back(x1);
  return pts;
}

template <HillCoefficient C>
Transfer rk_segment(const C& U, double lambda, double x0, double x1, bool with_derivative, const OdeOptions& opts,
                    double& h) {
  Transfer t;
  if (with_derivative) {
    // columns: (y, y', dy/dlambda, dy'/dlambda) for theta then phi
    using Vec = Eigen::Matrix<double, 8, 1>;
    auto rhs = [&](double x, const Vec& v) {
      const double q = U(x) - lambda;
      Vec d;
      for (int c = 0; c < 2; ++c) {
        const int o = 4 * c;
        d(o + 0) = v(o + 1);
        d(o + 1) = q * v(o + 0);
        d(o + 2) = v(o + 3);
        d(o + 3) = q * v(o + 2) - v(o + 0);
      }
      return d;
    };
    Vec v;
    v << 1, 0, 0, 0, 0, 1, 0, 0;
    v = dopri5(rhs, x0, x1, v, opts.tol, h, opts.max_steps);
    t.matrix << v(0), v(4), v(1), v(5);
    t.derivative << v(2), v(6), v(3), v(7);
  } else {
    using Vec = Eigen::Matrix<double, 4, 1>;
    auto rhs = [&](double x, const Vec& v) {
      const double q = U(x) - lambda;
      Vec d;
      d << v(1), q * v(0), v(3), q * v(2);
      return d;
    };
    Vec v;
    v << 1, 0, 0, 1;
    v = dopri5(rhs, x0, x1, v, opts.tol, h, opts.max_steps);
    t.matrix << v(0), v(2), v(1), v(3);
  }
  return t;
}

}  // namespace detail

/// Transfer matrix T with (y(x1), y'(x1)) = T (y(x0), y'(x0)), optionally with dT/dlambda.
template <HillCoefficient C>
Transfer hill_transfer(const C& U, double lambda, double x0, double x1, const OdeOptions& opts = {},
                       bool with_derivative = false) {
  Transfer total;
  if (x0 == x1) return total;
  const auto pts = detail::segment_points(U, x0, x1);
  const bool closed_form = U.is_piecewise_constant() && !opts.force_runge_kutta;
  double h = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double a = pts[i], b = pts[i + 1];
    if (a == b) continue;
    Transfer piece = closed_form ? detail::constant_piece(U(0.5 * (a + b)) - lambda, b - a)
                                 : detail::rk_segment(U, lambda, a, b, with_derivative, opts, h);
    if (with_derivative) total.derivative = piece.derivative * total.matrix + piece.matrix * total.derivative;
    total.matrix = piece.matrix * total.matrix;
  }
  return total;
}

/// Solution of -y'' + U y = lambda y at x1 given its Cauchy data at x0.
template <HillCoefficient C>
State2 propagate_hill(const C& U, double lambda, double x0, double x1, State2 s, const OdeOptions& opts = {}) {
  return State2::from(hill_transfer(U, lambda, x0, x1, opts).matrix * s.vec());
}

/// Dense trajectory: states at each abscissa in `xs` (monotone), starting from `s` at xs.front().
template <HillCoefficient C>
std::vector<State2> propagate_hill_samples(const C& U, double lambda, const std::vector<double>& xs, State2 s,
                                           const OdeOptions& opts = {}) {
  std::vector<State2> out;
  out.reserve(xs.size());
  if (xs.empty()) return out;
  out.push_back(s);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    s = propagate_hill(U, lambda, xs[i - 1], xs[i], s, opts);
    out.push_back(s);
  }
  return out;
}

/// Monodromy over one period [0,1] with theta(0)=1, theta'(0)=0, phi(0)=0, phi'(0)=1.
template <HillCoefficient C>
Monodromy monodromy(const C& U, double lambda, const OdeOptions& opts = {}, bool with_derivative = false) {
  const Transfer t = hill_transfer(U, lambda, 0.0, 1.0, opts, with_derivative);
  return Monodromy{t.matrix, t.derivative};
}

// ---------------------------------------------------------------------------
// Dirac
// ---------------------------------------------------------------------------

/// Generator K with psi' = K psi, K = i sigma_1 (lambda - m sigma_3 - W).
inline Eigen::Matrix2cd dirac_generator(double m, double lambda, const Eigen::Matrix2cd& W) {
  using namespace std::complex_literals;
  Eigen::Matrix2cd sigma1;
  sigma1 << 0, 1, 1, 0;
  Eigen::Matrix2cd M = -W;
  M(0, 0) += lambda - m;
  M(1, 1) += lambda + m;
  return 1i * (sigma1 * M);
}

/// Solution of the 1D Dirac system at x1 given psi(x0) = s.
inline SpinorState propagate_dirac(const MatrixPerturbation& W, double m, double lambda, double x0, double x1,
                                   SpinorState s, const OdeOptions& opts = {}) {
  if (!(m > 0.0)) throw ValidationError("mass must be positive");
  std::vector<double> pts{x0};
  std::vector<double> jumps = W.breaks();
  jumps.push_back(W.upper());
  std::sort(jumps.begin(), jumps.end());
  if (x1 > x0) {
    for (double b : jumps)
      if (b > x0 && b < x1) pts.push_back(b);
  } else {
    for (auto it = jumps.rbegin(); it != jumps.rend(); ++it)
      if (*it < x0 && *it > x1) pts.push_back(*it);
  }
  pts.push_back(x1);
  double h = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double a = pts[i], b = pts[i + 1];
    if (a == b) continue;
    const Eigen::Matrix2cd K = dirac_generator(m, lambda, W(0.5 * (a + b)));
    auto rhs = [&K](double, const SpinorState& v) -> SpinorState { return K * v; };
    s = dopri5(rhs, a, b, s, opts.tol, h, opts.max_steps);
  }
  return s;
}

}  // namespace spectral_decay
