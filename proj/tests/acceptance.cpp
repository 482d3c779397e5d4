// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any line fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "oracles.hpp"
#include "spectral_decay/verify.hpp"

using namespace spectral_decay;

namespace {

int failures = 0;

void line(int id, bool ok, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string failed_cases(const Report& r) {
  std::string out;
  for (const auto& c : r.cases)
    if (c.verdict == "FAIL") out += (out.empty() ? "" : ",") + c.name;
  return out.empty() ? "all cases pass" : "failing: " + out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double measured(const Report& r, const std::string& name, const std::string& key) {
  for (const auto& c : r.cases)
    if (c.name == name) return c.measured.at(key).get<double>();
  return NAN;
}

}  // namespace

int main() {
  {
    const auto t0 = std::chrono::steady_clock::now();
    const Report r = run_suite("free-closed-form");
    const double t = seconds_since(t0);
    char buf[160];
    std::snprintf(buf, sizeof buf, "free operator |F - cos/cosh| max %.3g (tol 1e-8), %.2f s (limit 5 s)",
                  measured(r, "discriminant_vs_cos_cosh", "max_abs_error"), t);
    line(1, !r.any_fail() && t < 5.0, buf);
  }
  {
    const Report r = run_suite("propH");
    char buf[200];
    std::snprintf(buf, sizeof buf, "equality dev %.3g, Mathieu worst margin %.3g (tol 1e-8)",
                  measured(r, "equality_free_operator", "max_abs_deviation"),
                  measured(r, "inequality_below_spectrum", "worst_margin"));
    line(2, !r.any_fail(), buf);
  }
  {
    const Report r = run_suite("edge-asymptotics");
    char buf[200];
    std::snprintf(buf, sizeof buf, "Mathieu first gap ratios -> %.6f / %.6f (tol 1e-3)",
                  measured(r, "first_gap_lower_edge", "extrapolated_ratio"),
                  measured(r, "first_gap_upper_edge", "extrapolated_ratio"));
    line(3, !r.any_fail(), buf);
  }
  {
    const Report r = run_suite("fprime");
    char buf[160];
    std::snprintf(buf, sizeof buf, "Theil-Sen slope %.4f (tol 0.05)", measured(r, "bounded_residual", "theil_sen_slope"));
    line(4, !r.any_fail(), buf);
  }
  {
    const Report r = run_suite("cross-method");
    char buf[200];
    std::snprintf(buf, sizeof buf, "shooting rel err %.2g, Birman-Schwinger rel err %.2g, delta_hat %.6f",
                  measured(r, "shooting_alpha", "rel_error"), measured(r, "birman_schwinger_alpha", "rel_error"),
                  measured(r, "tail_rate", "fitted_delta"));
    line(5, !r.any_fail(), buf);
  }
  {
    const Report r = run_suite("floquet-tail");
    char buf[200];
    std::snprintf(buf, sizeof buf, "delta_hat %.6f, period-shift deviation %.2g", measured(r, "fitted_rate_vs_ln_rho", "fitted_delta"),
                  measured(r, "period_shift_ratio", "max_rel_deviation"));
    line(6, !r.any_fail(), buf);
  }
  {
    const Report r = run_suite("theorem2-dirac");
    const auto ev = dirac_gap_eigenvalues(1.0, MatrixPerturbation::scalar_well(-1.0, 1.0, -0.5));
    const auto fd = oracle::dirac_well_eigenvalues(1.0, -0.5, -1.0, 1.0);
    double worst = ev.eigenvalues.size() == fd.size() && !fd.empty() ? 0.0 : INFINITY;
    for (std::size_t i = 0; std::isfinite(worst) && i < fd.size(); ++i)
      worst = std::max(worst, std::abs(ev.eigenvalues[i] - fd[i]));
    char buf[200];
    std::snprintf(buf, sizeof buf, "%zu eigenvalue(s), finite-difference deviation %.2g (tol 1e-6); %s", ev.eigenvalues.size(),
                  worst, failed_cases(r).c_str());
    line(7, !r.any_fail() && worst <= 1e-6, buf);
  }
  {
    const Report r = run_suite("symbol");
    char buf[200];
    std::snprintf(buf, sizeof buf, "gamma dirac3d %.17g, pauli pair %.17g", measured(r, "gamma_dirac3d", "gamma"),
                  measured(r, "gamma_pauli_pair", "gamma"));
    line(8, !r.any_fail(), buf);
  }
  {
    const auto t0 = std::chrono::steady_clock::now();
    const Report r = run_suite("counterexample");
    const double t = seconds_since(t0);
    char buf[300];
    std::snprintf(buf, sizeof buf, "inversions %d over %d gaps, witness ratio %.4f, %.2f s; %s",
                  int(measured(r, "ratio_sequence_decreasing", "inversions")),
                  int(measured(r, "ratio_sequence_decreasing", "gaps")), measured(r, "witness", "ratio"), t,
                  failed_cases(r).c_str());
    line(9, !r.any_fail() && t < 60.0, buf);
  }
  {
    const std::string a = run_suite("all").dump(), b = run_suite("all").dump();
    line(10, a == b, a == b ? "two 'all' reports byte-identical" : "reports differ");
  }
  return failures == 0 ? 0 : 1;
}
