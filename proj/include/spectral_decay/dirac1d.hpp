#pragma once

// Gap eigenvalues of the 1D Dirac operator -i sigma_1 d/dx + m sigma_3 + W with compactly
// supported Hermitian W, and their exponential tails
//   psi(x) = c_+- (sqrt(m+lambda), +-i sqrt(m-lambda)) exp(-sqrt(m^2-lambda^2) |x|).

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "spectral_decay/decay.hpp"
#include "spectral_decay/format.hpp"
#include "spectral_decay/ode.hpp"

namespace spectral_decay {

struct DiracTail {
  double rate = 0.0;
  /// Unit spinor of the tail right of supp W (decaying at +infinity).
  SpinorState direction_plus;
  /// Unit spinor of the tail left of supp W (decaying at -infinity).
  SpinorState direction_minus;
};

/// Tail rate sqrt(m^2 - lambda^2) and spinor directions for |lambda| < m.
inline DiracTail dirac_tail(double m, double lambda) {
  using namespace std::complex_literals;
  if (!(m > 0.0)) throw ValidationError("mass must be positive");
  if (!(std::abs(lambda) < m)) throw OutsideGap("|lambda| must be below m");
  const double up = std::sqrt(m + lambda), down = std::sqrt(m - lambda);
  const double norm = std::sqrt(2.0 * m);
  DiracTail t;
  t.rate = std::sqrt((m - lambda) * (m + lambda));
  t.direction_plus << up / norm, 1i * down / norm;
  t.direction_minus << up / norm, -1i * down / norm;
  return t;
}

/// d(lambda) = m - |lambda| on the gap (-m, m).
inline double dirac_gap_distance(double m, double lambda) { return std::max(0.0, m - std::abs(lambda)); }

struct SpinorSample {
  double x = 0.0;
  SpinorState psi = SpinorState::Zero();
};

struct DiracEigenpair {
  double m = 0.0;
  double lambda = 0.0;
  std::vector<SpinorSample> samples;
  double rate_exact = 0.0;
  SpinorState direction_plus;
  SpinorState direction_minus;
  std::complex<double> c_plus;
  std::complex<double> c_minus;
  double fitted_delta = 0.0;
  double d_lambda = 0.0;
  int padding = 0;
};

struct DiracOptions {
  OdeOptions ode;
  /// Sign-change scan resolution over the bracket.
  int scan_points = 1000;
  int samples_per_unit = 64;
  std::optional<int> padding;
};

struct DiracEigenvalues {
  std::vector<double> eigenvalues;
  /// NoEigenvalue: the scan found no sign change (a valid, flagged result).
  bool none_found = true;
};

/// Real matching function for lambda in (-m, m): the decaying-left mode is propagated
/// through supp W and compared with the decaying-right mode,
///   D = Re( e^{i Phi} det[u(b), v_+] / det[v_-, v_+] ),
/// with Phi the integral of the sigma_1 component of W. D = e^{kappa (b-a)} for W = 0.
inline double dirac_matching_determinant(double m, const MatrixPerturbation& W, double lambda,
                                         const OdeOptions& opts = {}) {
  using namespace std::complex_literals;
  const DiracTail t = dirac_tail(m, lambda);
  const SpinorState u =
      propagate_dirac(W, m, lambda, W.lower(), W.upper(), t.direction_minus, opts);
  auto det = [](const SpinorState& p, const SpinorState& q) { return p(0) * q(1) - p(1) * q(0); };
  const std::complex<double> ratio = det(u, t.direction_plus) / det(t.direction_minus, t.direction_plus);
  return (std::exp(1i * W.sigma1_integral()) * ratio).real();
}

/// Roots of the matching function inside the bracket (default: the whole gap).
inline DiracEigenvalues dirac_gap_eigenvalues(double m, const MatrixPerturbation& W,
                                              std::optional<std::pair<double, double>> bracket = std::nullopt,
                                              const DiracOptions& opts = {}) {
  const double edge = 1e-9 * m;
  const auto [lo, hi] = bracket.value_or(std::pair{-m + edge, m - edge});
  if (!(lo > -m && hi < m && lo < hi)) throw OutsideGap("bracket must lie inside (-m, m)");
  DiracEigenvalues out;
  auto f = [&](double l) { return dirac_matching_determinant(m, W, l, opts.ode); };
  const int n = std::max(2, opts.scan_points);
  double prev_l = lo, prev_f = f(lo);
  for (int i = 1; i <= n; ++i) {
    const double l = lo + (hi - lo) * double(i) / n;
    const double fl = f(l);
    if (prev_f == 0.0) {
      out.eigenvalues.push_back(prev_l);
    } else if ((fl > 0) != (prev_f > 0) && fl != 0.0) {
      double a = prev_l, b = l, fa = prev_f;
      while (b - a > 1e-14 * std::max(1.0, std::abs(a))) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        const double fm = f(mid);
        if ((fm > 0) == (fa > 0)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
      }
      out.eigenvalues.push_back(0.5 * (a + b));
    }
    prev_l = l;
    prev_f = fl;
  }
  out.none_found = out.eigenvalues.empty();
  return out;
}

/// Normalized eigenfunction at a gap eigenvalue; tails outside supp W are exact exponentials.
inline DiracEigenpair dirac_eigenfunction(double m, const MatrixPerturbation& W, double lambda,
                                          const DiracOptions& opts = {}) {
  const DiracTail t = dirac_tail(m, lambda);
  const double a = W.lower(), b = W.upper();
  const int pad = opts.padding.value_or(std::clamp(int(std::ceil(std::log(1e12) / (2.0 * t.rate))), 10, 4000));
  const double step = 1.0 / double(opts.samples_per_unit);

  // inside: propagate the left tail direction through the support
  std::vector<double> mid{a};
  for (long k = long(std::floor(a / step)) + 1; double(k) * step < b; ++k)
    if (double(k) * step > a) mid.push_back(double(k) * step);
  mid.push_back(b);
  std::vector<SpinorState> inside{t.direction_minus};
  for (std::size_t i = 1; i < mid.size(); ++i)
    inside.push_back(propagate_dirac(W, m, lambda, mid[i - 1], mid[i], inside.back(), opts.ode));

  Eigen::Matrix2cd basis;
  basis.col(0) = t.direction_plus;
  basis.col(1) = t.direction_minus;
  const Eigen::Vector2cd coef = basis.lu().solve(inside.back());
  const std::complex<double> c_plus = coef(0), c_minus = 1.0;
  if (std::abs(coef(1)) > 1e-6 * std::max(std::abs(c_plus), inside.back().norm()))
    throw DegenerateMatch("lambda is not an eigenvalue (growing tail component)");
  if (std::abs(c_plus) < 1e-300) throw DegenerateMatch("tail coefficients vanish");

  std::vector<SpinorSample> samples;
  for (long k = long(std::floor((a - pad) / step)); double(k) * step < a; ++k) {
    const double x = double(k) * step;
    samples.push_back({x, c_minus * std::exp(t.rate * (x - a)) * t.direction_minus});
  }
  for (std::size_t i = 0; i < mid.size(); ++i) samples.push_back({mid[i], inside[i]});
  for (long k = long(std::floor(b / step)) + 1; double(k) * step <= b + pad; ++k) {
    const double x = double(k) * step;
    samples.push_back({x, c_plus * std::exp(-t.rate * (x - b)) * t.direction_plus});
  }

  double norm2 = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i)
    norm2 += 0.5 * (samples[i].x - samples[i - 1].x) * (samples[i].psi.squaredNorm() + samples[i - 1].psi.squaredNorm());
  // exact exponential tails beyond the window
  norm2 += (samples.front().psi.squaredNorm() + samples.back().psi.squaredNorm()) / (2.0 * t.rate);
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& s : samples) s.psi *= inv;

  DiracEigenpair e;
  e.m = m;
  e.lambda = lambda;
  e.rate_exact = t.rate;
  e.direction_plus = t.direction_plus;
  e.direction_minus = t.direction_minus;
  e.c_plus = c_plus * inv;
  e.c_minus = c_minus * inv;
  e.d_lambda = dirac_gap_distance(m, lambda);
  e.padding = pad;
  std::vector<TailSample> tail;
  for (const auto& s : samples)
    if (s.x >= b + 1.0) tail.push_back({s.x, s.psi.norm()});
  e.samples = std::move(samples);
  e.fitted_delta = fit_decay_rate(tail, 1.0, Side::kRight, Window{b + 1.0, tail.back().x}).delta_hat;
  return e;
}

/// CSV with columns x,re_psi1,im_psi1,re_psi2,im_psi2.
inline void write_dirac_csv(std::ostream& os, const DiracEigenpair& e) {
  os << "x,re_psi1,im_psi1,re_psi2,im_psi2\n";
  for (const auto& s : e.samples) {
    os << format_number(s.x) << ',' << format_number(s.psi(0).real()) << ',' << format_number(s.psi(0).imag()) << ','
       << format_number(s.psi(1).real()) << ',' << format_number(s.psi(1).imag()) << '\n';
  }
}

inline nlohmann::json summary_json(const DiracEigenpair& e) {
  return {{"m", e.m},
          {"lambda", e.lambda},
          {"rate_exact", e.rate_exact},
          {"fitted_delta", e.fitted_delta},
          {"d_lambda", e.d_lambda}};
}

}  // namespace spectral_decay
