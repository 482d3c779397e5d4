#pragma once

// Symbol A(xi) = sum_j A_j xi_j of a first-order system with Hermitian coefficients, the
// constant gamma = max_{|xi|=1} ||A(xi)|| and the ellipticity margin
// c = min_{|xi|=1} sigma_min(A(xi)).

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "spectral_decay/errors.hpp"
#include "spectral_decay/parallel.hpp"

namespace spectral_decay {

using ComplexMatrix = Eigen::MatrixXcd;

class SymbolSystem {
 public:
  explicit SymbolSystem(std::vector<ComplexMatrix> matrices) : matrices_(std::move(matrices)) {
    if (matrices_.empty()) throw ValidationError("at least one coefficient matrix is required");
    const auto n = matrices_.front().rows();
    for (const auto& a : matrices_) {
      if (a.rows() != n || a.cols() != n) throw DimensionMismatch("coefficient matrices must be n x n");
      if ((a - a.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw ValidationError("coefficient matrices must be Hermitian");
    }
  }

  int dimension() const { return int(matrices_.size()); }
  int size() const { return int(matrices_.front().rows()); }
  const std::vector<ComplexMatrix>& matrices() const { return matrices_; }

  /// Lipschitz constant of xi -> ||A(xi)|| in the Euclidean metric.
  double lipschitz() const {
    double s = 0.0;
    for (const auto& a : matrices_) s += a.operatorNorm();
    return s;
  }

 private:
  std::vector<ComplexMatrix> matrices_;
};

struct SymbolReport {
  double gamma = 0.0;
  Eigen::VectorXd gamma_argmax;
  double ellipticity_margin = 0.0;
  Eigen::VectorXd margin_argmin;
  bool elliptic = false;
  /// Best value on the certification grid and grid + Lipschitz * covering radius.
  double grid_gamma = 0.0;
  double gamma_upper_bound = 0.0;
};

struct SymbolOptions {
  /// Starts per sphere dimension for the local searches.
  int starts_per_dimension = 32;
  /// Angular resolution of the certification grid (radians).
  double grid_resolution = 0.02;
  /// Point budget for grids in d >= 4, where a quasi-uniform grid is replaced by random points.
  std::size_t max_grid_points = 200'000;
  double gradient_tol = 1e-10;
  double ellipticity_tol = 1e-8;
  unsigned seed = 12345;
};

/// sum_j A_j xi_j
inline ComplexMatrix symbol(const SymbolSystem& system, const Eigen::VectorXd& xi) {
  if (xi.size() != system.dimension()) throw DimensionMismatch("xi must have one entry per coefficient matrix");
  ComplexMatrix a = ComplexMatrix::Zero(system.size(), system.size());
  for (int j = 0; j < system.dimension(); ++j) a += xi(j) * system.matrices()[std::size_t(j)];
  return a;
}

/// Eigenvalues of A(xi), ascending.
inline Eigen::VectorXd symbol_eigenvalues(const SymbolSystem& system, const Eigen::VectorXd& xi) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(symbol(system, xi), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

/// Spectral norm of A(xi).
inline double symbol_norm(const SymbolSystem& system, const Eigen::VectorXd& xi) {
  const Eigen::VectorXd ev = symbol_eigenvalues(system, xi);
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

/// Smallest singular value of A(xi).
inline double symbol_min_singular(const SymbolSystem& system, const Eigen::VectorXd& xi) {
  return symbol_eigenvalues(system, xi).cwiseAbs().minCoeff();
}

namespace detail {

// Quasi-uniform points on S^{d-1} with roughly the given angular spacing.
inline std::vector<Eigen::VectorXd> sphere_grid(int d, double resolution, std::size_t max_points, unsigned seed) {
  std::vector<Eigen::VectorXd> pts;
  if (d == 1) {
    pts.push_back(Eigen::VectorXd::Constant(1, 1.0));
    pts.push_back(Eigen::VectorXd::Constant(1, -1.0));
  } else if (d == 2) {
    const auto n = std::size_t(std::ceil(2.0 * std::numbers::pi / resolution));
    for (std::size_t k = 0; k < n; ++k) {
      const double t = 2.0 * std::numbers::pi * double(k) / double(n);
      Eigen::VectorXd v(2);
      v << std::cos(t), std::sin(t);
      pts.push_back(v);
    }
  } else if (d == 3) {
    // Fibonacci lattice; spacing ~ sqrt(4 pi / n)
    const auto n = std::size_t(std::ceil(4.0 * std::numbers::pi / (resolution * resolution)));
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t k = 0; k < n; ++k) {
      const double z = 1.0 - 2.0 * (double(k) + 0.5) / double(n);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * double(k);
      Eigen::VectorXd v(3);
      v << r * std::cos(phi), r * std::sin(phi), z;
      pts.push_back(v);
    }
  } else {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    for (std::size_t k = 0; k < max_points; ++k) {
      Eigen::VectorXd v(d);
      for (int i = 0; i < d; ++i) v(i) = normal(rng);
      pts.push_back(v.normalized());
    }
  }
  return pts;
}

// Covering radius (chordal) of the grid above.
inline double covering_radius(int d, std::size_t points, double resolution) {
  if (d == 1) return 0.0;
  if (d == 2 || d == 3) return resolution;
  // random points carry no deterministic covering guarantee; report the nominal spacing
  return std::pow(double(points), -1.0 / double(d - 1));
}

// Projected gradient ascent of ||A(xi)|| on the sphere with backtracking.
inline Eigen::VectorXd ascend(const SymbolSystem& system, Eigen::VectorXd xi, double gradient_tol, double& value) {
  const int d = system.dimension();
  xi.normalize();
  value = symbol_norm(system, xi);
  double step = 0.5;
  for (int it = 0; it < 500; ++it) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(symbol(system, xi));
    const Eigen::VectorXd& ev = es.eigenvalues();
    const Eigen::Index top = std::abs(ev(0)) > std::abs(ev(ev.size() - 1)) ? 0 : ev.size() - 1;
    const double sgn = ev(top) < 0 ? -1.0 : 1.0;
    const Eigen::VectorXcd v = es.eigenvectors().col(top);
    Eigen::VectorXd grad(d);
    for (int j = 0; j < d; ++j) grad(j) = sgn * (v.adjoint() * system.matrices()[std::size_t(j)] * v)(0).real();
    const Eigen::VectorXd tangent = grad - grad.dot(xi) * xi;
    if (tangent.norm() <= gradient_tol) break;
    bool improved = false;
    while (step > 1e-16) {
      const Eigen::VectorXd trial = (xi + step * tangent).normalized();
      const double tv = symbol_norm(system, trial);
      if (tv > value) {
        xi = trial;
        value = tv;
        improved = true;
        step = std::min(1.0, step * 2.0);
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  return xi;
}

// Derivative-free pattern search minimizing f on the sphere (f may be non-smooth).
template <class Fn>
Eigen::VectorXd pattern_minimize(const Fn& f, Eigen::VectorXd xi, double step, double& value) {
  const int d = int(xi.size());
  xi.normalize();
  value = f(xi);
  while (step > 1e-13) {
    bool improved = false;
    for (int j = 0; j < d && !improved; ++j) {
      for (double s : {step, -step}) {
        Eigen::VectorXd trial = xi;
        trial(j) += s;
        trial.normalize();
        const double tv = f(trial);
        if (tv < value) {
          xi = trial;
          value = tv;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return xi;
}

}  // namespace detail

/// gamma, its argmax and the ellipticity margin.
inline SymbolReport analyze_symbol(const SymbolSystem& system, const SymbolOptions& opts = {}) {
  const int d = system.dimension();
  const auto grid = detail::sphere_grid(d, opts.grid_resolution, opts.max_grid_points, opts.seed);

  std::vector<double> norms(grid.size()), mins(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const Eigen::VectorXd ev = symbol_eigenvalues(system, grid[i]);
    norms[i] = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    mins[i] = ev.cwiseAbs().minCoeff();
  });

  SymbolReport r;
  const auto imax = std::size_t(std::max_element(norms.begin(), norms.end()) - norms.begin());
  const auto imin = std::size_t(std::min_element(mins.begin(), mins.end()) - mins.begin());
  r.grid_gamma = norms[imax];
  r.gamma_upper_bound = r.grid_gamma + system.lipschitz() * detail::covering_radius(d, grid.size(), opts.grid_resolution);
  r.gamma = norms[imax];
  r.gamma_argmax = grid[imax];
  r.ellipticity_margin = mins[imin];
  r.margin_argmin = grid[imin];

  // Local searches: the best grid points plus deterministic random starts.
  std::vector<Eigen::VectorXd> starts{grid[imax]};
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  const int n_starts = std::max(1, opts.starts_per_dimension * d);
  for (int s = 0; s < n_starts; ++s) {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v(i) = normal(rng);
    starts.push_back(v);
  }
  for (const auto& s : starts) {
    double value = 0.0;
    Eigen::VectorXd xi = detail::ascend(system, s, opts.gradient_tol, value);
    if (value > r.gamma) {
      r.gamma = value;
      r.gamma_argmax = xi;
    }
  }

  auto min_sv = [&](const Eigen::VectorXd& xi) { return symbol_min_singular(system, xi); };
  std::vector<Eigen::VectorXd> mstarts{grid[imin]};
  mstarts.insert(mstarts.end(), starts.begin() + 1, starts.begin() + std::min<std::ptrdiff_t>(starts.size(), 1 + 4 * d));
  for (const auto& s : mstarts) {
    double value = 0.0;
    Eigen::VectorXd xi = detail::pattern_minimize(min_sv, s, 4.0 * opts.grid_resolution, value);
    if (value < r.ellipticity_margin) {
      r.ellipticity_margin = value;
      r.margin_argmin = xi;
    }
  }
  r.gamma_upper_bound = std::max(r.gamma_upper_bound, r.gamma);
  r.elliptic = r.ellipticity_margin > opts.ellipticity_tol;
  return r;
}

inline double gamma(const SymbolSystem& system, const SymbolOptions& opts = {}) {
  return analyze_symbol(system, opts).gamma;
}

inline double ellipticity_margin(const SymbolSystem& system, const SymbolOptions& opts = {}) {
  return analyze_symbol(system, opts).ellipticity_margin;
}

// ---------------------------------------------------------------------------
// Standard systems
// ---------------------------------------------------------------------------

inline std::vector<ComplexMatrix> pauli_matrices() {
  using namespace std::complex_literals;
  ComplexMatrix s1(2, 2), s2(2, 2), s3(2, 2);
  s1 << 0, 1, 1, 0;
  s2 << 0, -1i, 1i, 0;
  s3 << 1, 0, 0, -1;
  return {s1, s2, s3};
}

/// alpha_0 = diag(I, -I) and alpha_j = [[0, sigma_j], [sigma_j, 0]], j = 1..3.
inline std::vector<ComplexMatrix> dirac_alpha_matrices() {
  const auto pauli = pauli_matrices();
  std::vector<ComplexMatrix> out;
  ComplexMatrix a0 = ComplexMatrix::Zero(4, 4);
  a0.topLeftCorner(2, 2).setIdentity();
  a0.bottomRightCorner(2, 2) = -ComplexMatrix::Identity(2, 2);
  out.push_back(a0);
  for (const auto& s : pauli) {
    ComplexMatrix a = ComplexMatrix::Zero(4, 4);
    a.topRightCorner(2, 2) = s;
    a.bottomLeftCorner(2, 2) = s;
    out.push_back(a);
  }
  return out;
}

/// Kinetic part of the 3D Dirac operator: A_j = alpha_j, j = 1..3.
inline SymbolSystem dirac3d_system() {
  auto all = dirac_alpha_matrices();
  return SymbolSystem({all[1], all[2], all[3]});
}

// ---------------------------------------------------------------------------
// JSON: {"n":4,"d":3,"matrices":[[[re,im], ...n*n row-major], ...]}
// ---------------------------------------------------------------------------

inline SymbolSystem load_symbol_system(const nlohmann::json& doc) {
  if (!doc.is_object()) throw SchemaError("expected an object");
  for (const char* key : {"n", "d", "matrices"})
    if (!doc.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
  if (!doc["n"].is_number_integer() || !doc["d"].is_number_integer())
    throw SchemaError("'n' and 'd' must be integers");
  const int n = doc["n"].get<int>(), d = doc["d"].get<int>();
  if (n < 1 || d < 1) throw ValidationError("'n' and 'd' must be positive");
  const auto& mats = doc["matrices"];
  if (!mats.is_array()) throw SchemaError("'matrices' must be an array");
  if (int(mats.size()) != d) throw DimensionMismatch("'matrices' must hold d matrices");
  std::vector<ComplexMatrix> out;
  for (const auto& m : mats) {
    if (!m.is_array() || int(m.size()) != n * n) throw DimensionMismatch("each matrix needs n*n entries");
    ComplexMatrix a(n, n);
    for (int k = 0; k < n * n; ++k) {
      const auto& e = m[std::size_t(k)];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        throw SchemaError("complex entries must be [re, im] pairs");
      a(k / n, k % n) = {e[0].get<double>(), e[1].get<double>()};
    }
    out.push_back(a);
  }
  return SymbolSystem(std::move(out));
}

inline nlohmann::json to_json(const SymbolSystem& system) {
  nlohmann::json mats = nlohmann::json::array();
  const int n = system.size();
  for (const auto& a : system.matrices()) {
    nlohmann::json m = nlohmann::json::array();
    for (int k = 0; k < n * n; ++k) m.push_back({a(k / n, k % n).real(), a(k / n, k % n).imag()});
    mats.push_back(m);
  }
  return {{"n", n}, {"d", system.dimension()}, {"matrices", mats}};
}

}  // namespace spectral_decay
