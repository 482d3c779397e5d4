#pragma once

// Verification suites: each suite evaluates one family of quantitative claims and emits
//   {"suite": name, "cases": [{name, inputs, measured, expected, tol, verdict}, ...]}
// Reports contain no timings, so identical inputs give byte-identical output.

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "spectral_decay/bands.hpp"
#include "spectral_decay/checks.hpp"
#include "spectral_decay/decay.hpp"
#include "spectral_decay/dirac1d.hpp"
#include "spectral_decay/gap_solver.hpp"
#include "spectral_decay/symbol.hpp"

namespace spectral_decay {

struct CaseResult {
  std::string name;
  nlohmann::json inputs;
  nlohmann::json measured;
  nlohmann::json expected;
  double tol = 0.0;
  /// PASS, FAIL or WARN; only FAIL makes a report fail.
  std::string verdict;
};

struct Report {
  std::string suite;
  std::vector<CaseResult> cases;

  bool any_fail() const {
    for (const auto& c : cases)
      if (c.verdict == "FAIL") return true;
    return false;
  }

  nlohmann::json to_json() const {
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : cases) {
      cs.push_back({{"name", c.name},
                    {"inputs", c.inputs},
                    {"measured", c.measured},
                    {"expected", c.expected},
                    {"tol", c.tol},
                    {"verdict", c.verdict}});
    }
    return {{"suite", suite}, {"cases", cs}};
  }

  std::string dump() const { return to_json().dump(2) + "\n"; }
};

/// Overrides for the built-in test potentials.
struct SuiteOptions {
  std::optional<PeriodicPotential> potential;
};

namespace suites {

inline const char* pass_fail(bool ok) { return ok ? "PASS" : "FAIL"; }

inline PeriodicPotential mathieu() { return PeriodicPotential::fourier(0.0, {2.0}); }
inline PeriodicPotential step_potential() { return PeriodicPotential::piecewise({0.0, 0.5}, {10.0, 0.0}); }

/// Root of s tan s = kappa on (0, pi/2): the even bound state of a unit-depth-normalized well.
inline double square_well_s(double kappa) {
  double lo = 0.0, hi = 0.5 * std::numbers::pi;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid * std::tan(mid) < kappa) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline Report free_closed_form() {
  Report r{"free-closed-form", {}};
  OdeOptions rk;
  rk.force_runge_kutta = true;
  const auto V = PeriodicPotential::zero();
  double worst = 0.0, worst_at = 0.0;
  for (double l : linear_grid(-10.0, 100.0, 500)) {
    const double exact = l >= 0 ? std::cos(std::sqrt(l)) : std::cosh(std::sqrt(-l));
    const double err = std::abs(discriminant(V, l, rk) - exact);
    if (err > worst) {
      worst = err;
      worst_at = l;
    }
  }
  r.cases.push_back({"discriminant_vs_cos_cosh",
                     {{"potential", "zero"}, {"lambda_range", {-10.0, 100.0}}, {"points", 500}, {"integrator", "dopri5"}},
                     {{"max_abs_error", worst}, {"at_lambda", worst_at}},
                     "cos(sqrt(lambda)) / cosh(sqrt(-lambda))",
                     1e-8,
                     pass_fail(worst <= 1e-8)});
  return r;
}

inline Report prop_h(const SuiteOptions& opts) {
  Report r{"propH", {}};
  {
    const auto V = PeriodicPotential::zero();
    double worst = 0.0;
    for (double l : linear_grid(-10.0, -0.01, 500)) {
      const double lr = log_multiplicator(discriminant(V, l));
      worst = std::max(worst, std::abs(lr * lr + l));
    }
    r.cases.push_back({"equality_free_operator",
                       {{"potential", "zero"}, {"lambda_range", {-10.0, -0.01}}, {"points", 500}},
                       {{"max_abs_deviation", worst}},
                       "ln^2 rho = -lambda",
                       1e-8,
                       pass_fail(worst <= 1e-8)});
  }
  {
    const auto V = opts.potential.value_or(mathieu());
    const auto bands = band_edges(V, 20.0);
    auto grid = linear_grid(bands.lambda0 - 10.0, bands.lambda0, 501);
    grid.pop_back();  // half-open interval
    const auto res = check_prop_H(V, bands.lambda0, grid);
    r.cases.push_back({"inequality_below_spectrum",
                       {{"potential", to_json(V)}, {"lambda_range", {bands.lambda0 - 10.0, bands.lambda0}}, {"points", 500}},
                       {{"lambda0", bands.lambda0}, {"worst_margin", res.worst_margin}, {"at_lambda", res.worst_lambda}},
                       "ln^2 rho - (lambda0 - lambda) >= -tol",
                       kPropHTol,
                       pass_fail(res.pass)});
  }
  return r;
}

inline Report edge_asymptotics(const SuiteOptions& opts) {
  Report r{"edge-asymptotics", {}};
  {
    const auto res = check_edge_asymptotics(PeriodicPotential::zero(), 0.0, approach_grid(0.0, 1.0, -1.0));
    r.cases.push_back({"free_operator_bottom",
                       {{"potential", "zero"}, {"edge", 0.0}},
                       {{"extrapolated_ratio", res.extrapolated}, {"ratios", res.ratios}},
                       1.0,
                       kEdgeRatioTol,
                       pass_fail(res.pass)});
  }
  const auto V = opts.potential.value_or(mathieu());
  const auto bands = band_edges(V, 60.0);
  if (bands.gaps.empty()) {
    r.cases.push_back({"first_gap", {{"potential", to_json(V)}}, "no open gap", 1.0, kEdgeRatioTol, "FAIL"});
    return r;
  }
  const Gap g = bands.gaps.front();
  for (const auto& [label, edge, side] : {std::tuple{"first_gap_lower_edge", g.lower, 1.0},
                                          std::tuple{"first_gap_upper_edge", g.upper, -1.0}}) {
    const auto res = check_edge_asymptotics(V, edge, approach_grid(edge, g.width(), side));
    r.cases.push_back({label,
                       {{"potential", to_json(V)}, {"edge", res.edge}, {"gap_width", g.width()}},
                       {{"extrapolated_ratio", res.extrapolated}, {"Fprime_edge", res.Fprime_edge}, {"ratios", res.ratios}},
                       1.0,
                       kEdgeRatioTol,
                       pass_fail(res.pass)});
  }
  return r;
}

inline Report fprime(const SuiteOptions& opts) {
  Report r{"fprime", {}};
  const auto V = opts.potential.value_or(step_potential());
  const auto res = check_F_prime_asymptotics(V, log_grid(1e3, 1e5, 400));
  r.cases.push_back({"bounded_residual",
                     {{"potential", to_json(V)}, {"lambda_range", {1e3, 1e5}}, {"points", 400}},
                     {{"theil_sen_slope", res.slope}, {"max_residual", res.max_residual}},
                     "slope <= tol",
                     kSlopeTol,
                     pass_fail(res.pass)});
  return r;
}

inline Report cross_method() {
  Report r{"cross-method", {}};
  const auto V = PeriodicPotential::zero();
  const auto Q = CompactPerturbation::indicator(-1.0, 1.0);
  const double lambda = -1.0;
  const double s = square_well_s(1.0);
  const double alpha_exact = 1.0 + s * s;
  const GapProblem problem(V, Q, lambda);
  const double alpha = problem.solve_coupling();
  const auto bs = problem.birman_schwinger(2048);
  const double alpha_bs = 1.0 / bs.mu_max().value_or(std::numeric_limits<double>::quiet_NaN());
  const auto e = problem.eigenfunction(alpha);
  const nlohmann::json inputs = {{"potential", "zero"}, {"Q", to_json(Q)}, {"lambda", lambda}};
  const double rel_shoot = std::abs(alpha / alpha_exact - 1.0);
  const double rel_bs = std::abs(alpha_bs / alpha_exact - 1.0);
  r.cases.push_back({"shooting_alpha", inputs, {{"alpha", alpha}, {"rel_error", rel_shoot}}, alpha_exact, 1e-4,
                     pass_fail(rel_shoot <= 1e-4)});
  r.cases.push_back({"birman_schwinger_alpha", inputs, {{"alpha", alpha_bs}, {"rel_error", rel_bs}, {"nodes", 2048}},
                     alpha_exact, 1e-4, pass_fail(rel_bs <= 1e-4)});
  r.cases.push_back({"tail_rate", inputs, {{"fitted_delta", e.fitted_delta}}, 1.0, 0.01,
                     pass_fail(std::abs(e.fitted_delta - 1.0) <= 0.01)});
  return r;
}

inline Report floquet_tail(const SuiteOptions& opts) {
  Report r{"floquet-tail", {}};
  const auto V = opts.potential.value_or(step_potential());
  const auto bands = band_edges(V, 60.0);
  const double lambda = bands.gaps.at(0).midpoint();
  const auto Q = CompactPerturbation::indicator(0.0, 1.0);
  const GapProblem problem(V, Q, lambda);
  const double alpha = problem.solve_coupling();
  const auto e = problem.eigenfunction(alpha);
  const double lr = e.log_rho;
  const nlohmann::json inputs = {{"potential", to_json(V)}, {"Q", to_json(Q)}, {"lambda", lambda}};
  r.cases.push_back({"fitted_rate_vs_ln_rho", inputs, {{"fitted_delta", e.fitted_delta}, {"alpha", alpha}}, lr,
                     0.01 * lr, pass_fail(std::abs(e.fitted_delta - lr) <= 0.01 * lr)});

  // direct forward propagation of psi from the support edge over three periods
  const double b = Q.upper();
  const State2 at_b = problem.matched_state(alpha);
  double x0 = b, best = -1.0;
  for (int k = 0; k < 64; ++k) {
    const double x = b + k / 64.0;
    const double v = std::abs(propagate_hill(V, lambda, b, x, at_b).y);
    if (v > best) {
      best = v;
      x0 = x;
    }
  }
  const double expected = problem.floquet().multiplier(Branch::kPlus);
  double worst = 0.0;
  State2 s = propagate_hill(V, lambda, b, x0, at_b);
  for (int k = 0; k < 3; ++k) {
    const State2 next = propagate_hill(V, lambda, x0 + k, x0 + k + 1, s);
    worst = std::max(worst, std::abs(next.y / s.y / expected - 1.0));
    s = next;
  }
  r.cases.push_back({"period_shift_ratio", inputs, {{"max_rel_deviation", worst}}, expected, 1e-4,
                     pass_fail(worst <= 1e-4)});
  return r;
}

inline Report theorem2_dirac() {
  Report r{"theorem2-dirac", {}};
  const double m = 1.0;
  const auto W = MatrixPerturbation::scalar_well(-1.0, 1.0, -0.5);
  const auto ev = dirac_gap_eigenvalues(m, W);
  if (ev.none_found) {
    r.cases.push_back({"eigenvalues", {{"m", m}, {"well", -0.5}}, "none", "at least one", 0.0, "FAIL"});
    return r;
  }
  for (std::size_t i = 0; i < ev.eigenvalues.size(); ++i) {
    const double l = ev.eigenvalues[i];
    const auto e = dirac_eigenfunction(m, W, l);
    const auto rep = bound_report({.lambda = l,
                                   .d_lambda = e.d_lambda,
                                   .gamma = 1.0,
                                   .reference_rate = e.rate_exact,
                                   .delta_hat = e.fitted_delta,
                                   .below_spectrum = false,
                                   .second_order = false});
    const nlohmann::json inputs = {{"m", m}, {"well", -0.5}, {"support", {-1.0, 1.0}}, {"lambda", l}};
    const std::string idx = std::to_string(i);
    r.cases.push_back({"sharp_rate_" + idx, inputs, {{"fitted_delta", e.fitted_delta}}, e.rate_exact,
                       0.01 * e.rate_exact, to_string(rep.floquet_match)});
    r.cases.push_back({"first_order_bound_" + idx, inputs,
                       {{"fitted_delta", e.fitted_delta}, {"d_lambda", e.d_lambda}, {"gamma", 1.0}},
                       "delta_hat >= d/gamma (1 - tol)", 0.01, to_string(rep.first_order_theorem)});
  }
  return r;
}

inline Report symbol_suite() {
  Report r{"symbol", {}};
  const auto dirac = dirac3d_system();
  const auto rep = analyze_symbol(dirac);
  r.cases.push_back({"gamma_dirac3d", {{"system", "dirac3d"}}, {{"gamma", rep.gamma}}, 1.0, 1e-10,
                     pass_fail(std::abs(rep.gamma - 1.0) <= 1e-10)});
  const auto pauli = pauli_matrices();
  const SymbolSystem pair({pauli[0], pauli[1]});
  const double gp = gamma(pair);
  r.cases.push_back({"gamma_pauli_pair", {{"system", "sigma1,sigma2"}}, {{"gamma", gp}}, 1.0, 1e-12,
                     pass_fail(std::abs(gp - 1.0) <= 1e-12)});

  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    Eigen::VectorXd xi(3);
    for (int i = 0; i < 3; ++i) xi(i) = normal(rng);
    const Eigen::VectorXd ev = symbol_eigenvalues(dirac, xi);
    const double n = xi.norm();
    for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(ev(i) - (i < 2 ? -n : n)));
  }
  r.cases.push_back({"dirac3d_eigenvalues", {{"system", "dirac3d"}, {"samples", 100}, {"seed", 2024}},
                     {{"max_abs_deviation", worst}}, "+-|xi|, multiplicity 2", 1e-10, pass_fail(worst <= 1e-10)});
  return r;
}

inline Report counterexample(const SuiteOptions& opts) {
  Report r{"counterexample", {}};
  const auto V = opts.potential.value_or(step_potential());
  const double eps = 0.5;
  const int max_gap = 8;
  const auto res = counterexample_search(V, eps, max_gap);
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& g : res.trace)
    trace.push_back({{"gap", g.gap_index}, {"lambda_mid", g.lambda}, {"width", g.gap.width()}, {"ratio", g.ratio}});
  const nlohmann::json inputs = {{"potential", to_json(V)}, {"eps", eps}, {"max_gap_index", max_gap}};

  const bool enough = res.trace.size() >= 6;
  r.cases.push_back({"ratio_sequence_decreasing", inputs, {{"gaps", res.trace.size()}, {"inversions", res.inversions}, {"trace", trace}},
                     "at most one inversion over >= 6 gaps", 1.0, pass_fail(enough && res.inversions <= 1)});

  if (!res.witness) {
    r.cases.push_back({"witness", inputs, "NotFound", "ratio < eps", eps, "WARN"});
    return r;
  }
  const auto& w = *res.witness;
  r.cases.push_back({"witness", inputs,
                     {{"gap", w.point.gap_index}, {"lambda", w.point.lambda}, {"ratio", w.point.ratio}},
                     "ratio < eps", eps, pass_fail(w.point.ratio < eps)});
  const double bound = eps * std::sqrt(w.point.d_lambda);
  r.cases.push_back({"materialized_decay", inputs,
                     {{"alpha", w.alpha.value_or(0.0)}, {"fitted_delta", w.delta_hat.value_or(0.0)}, {"eps_sqrt_d", bound}},
                     "fitted_delta < eps sqrt(d)", eps, pass_fail(w.verified)});
  return r;
}

}  // namespace suites

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"free-closed-form", "propH",         "edge-asymptotics",
                                              "fprime",           "cross-method",  "floquet-tail",
                                              "theorem2-dirac",   "symbol",        "counterexample"};
  return names;
}

/// Runs one suite, or every suite for "all" (cases prefixed with their suite name).
inline Report run_suite(const std::string& name, const SuiteOptions& opts = {}) {
  using namespace suites;
  if (name == "all") {
    Report all{"all", {}};
    for (const auto& n : suite_names()) {
      Report part = run_suite(n, opts);
      for (auto& c : part.cases) {
        c.name = n + "/" + c.name;
        all.cases.push_back(std::move(c));
      }
    }
    return all;
  }
  if (name == "free-closed-form") return free_closed_form();
  if (name == "propH") return prop_h(opts);
  if (name == "edge-asymptotics") return edge_asymptotics(opts);
  if (name == "fprime") return fprime(opts);
  if (name == "cross-method") return cross_method();
  if (name == "floquet-tail") return floquet_tail(opts);
  if (name == "theorem2-dirac") return theorem2_dirac();
  if (name == "symbol") return symbol_suite();
  if (name == "counterexample") return counterexample(opts);
  throw ValidationError("unknown suite '" + name + "'");
}

}  // namespace spectral_decay
