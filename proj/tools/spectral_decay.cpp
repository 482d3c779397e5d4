// spectral_decay: command-line front end for band structure, gap eigenvalue and decay checks.
//
// Exit codes: 0 success, 1 FAIL verdict or numerical failure, 2 usage or input error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spectral_decay/bands.hpp"
#include "spectral_decay/dirac1d.hpp"
#include "spectral_decay/format.hpp"
#include "spectral_decay/gap_solver.hpp"
#include "spectral_decay/parallel.hpp"
#include "spectral_decay/symbol.hpp"
#include "spectral_decay/verify.hpp"

namespace fs = std::filesystem;
using namespace spectral_decay;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

struct Range {
  double start = 0.0;
  double stop = 0.0;
  int count = 0;

  std::vector<double> points() const {
    if (count == 1) return {start};
    std::vector<double> g;
    for (int i = 0; i < count; ++i) g.push_back(start + (stop - start) * double(i) / double(count - 1));
    return g;
  }
};

// "start:stop:count"
Range parse_range(const std::string& text) {
  Range r;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%d%c", &r.start, &r.stop, &r.count, &tail) != 3)
    throw UsageError("range must be start:stop:count, got '" + text + "'");
  if (r.count < 1) throw UsageError("range count must be at least 1");
  if (r.count > 1 && !(r.stop > r.start)) throw UsageError("range stop must exceed start");
  return r;
}

std::pair<double, double> parse_pair(const std::string& text) {
  double a = 0, b = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf%c", &a, &b, &tail) != 2 || !(b > a))
    throw UsageError("bracket must be lo:hi with lo < hi, got '" + text + "'");
  return {a, b};
}

/// Output sink: a file in the output directory, or stdout when no directory is given.
class Output {
 public:
  explicit Output(std::string dir) : dir_(std::move(dir)) {
    if (dir_.empty()) return;
    std::error_code ec;
    fs::create_directories(dir_, ec);
    const fs::path probe = fs::path(dir_) / ".write_test";
    std::ofstream f(probe);
    if (!f) throw UsageError("output directory '" + dir_ + "' is not writable");
    f.close();
    fs::remove(probe, ec);
  }

  bool to_directory() const { return !dir_.empty(); }

  void write(const std::string& name, const std::string& content) const {
    if (dir_.empty()) {
      std::cout << content;
      return;
    }
    const fs::path p = fs::path(dir_) / name;
    std::ofstream f(p, std::ios::binary);
    f << content;
    if (!f) throw std::runtime_error("failed to write " + p.string());
  }

 private:
  std::string dir_;
};

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

struct Common {
  std::string out_dir;
  std::string format = "csv";
  double tol = 1e-10;

  void attach(CLI::App* app, bool with_format = true) {
    app->add_option("-o,--out-dir", out_dir, "Directory for output files (default: stdout)");
    if (with_format) app->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    app->add_option("--tol", tol, "ODE tolerance")->check(CLI::PositiveNumber);
  }

  OdeOptions ode() const {
    OdeOptions o;
    o.tol = tol;
    return o;
  }
};

// ---------------------------------------------------------------------------

int run_bands(const Common& c, const std::string& potential_path, double lambda_max, double grid_step) {
  const auto V = load_potential(read_json(potential_path));
  const Output out(c.out_dir);
  BandOptions opts;
  opts.grid_step = grid_step;
  opts.ode = c.ode();
  const auto b = band_edges(V, lambda_max, opts);
  if (c.format == "csv") {
    std::ostringstream os;
    write_edges_csv(os, b);
    out.write("edges.csv", os.str());
    return 0;
  }
  nlohmann::json gaps = nlohmann::json::array(), closed = nlohmann::json::array();
  for (const auto& g : b.gaps) gaps.push_back({g.lower, g.upper});
  for (double x : b.closed_gaps) closed.push_back(x);
  out.write("bands.json", dump({{"potential", to_json(V)},
                                {"lambda0", b.lambda0},
                                {"gaps", gaps},
                                {"closed_gaps", closed},
                                {"scan_ceiling", b.scan_ceiling},
                                {"incomplete", b.incomplete}}));
  return 0;
}

int run_discriminant(const Common& c, const std::string& potential_path, const std::string& range) {
  const auto V = load_potential(read_json(potential_path));
  const auto grid = parse_range(range).points();
  const Output out(c.out_dir);
  std::vector<double> F(grid.size()), dF(grid.size());
  const auto ode = c.ode();
  parallel_for(grid.size(), [&](std::size_t i) {
    F[i] = discriminant(V, grid[i], ode);
    dF[i] = discriminant_derivative(V, grid[i], ode);
  });
  if (c.format == "csv") {
    std::ostringstream os;
    os << "lambda,F,dF,ln_rho\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
      os << format_number(grid[i]) << ',' << format_number(F[i]) << ',' << format_number(dF[i]) << ','
         << format_number(log_multiplicator(F[i])) << '\n';
    out.write("discriminant.csv", os.str());
    return 0;
  }
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < grid.size(); ++i)
    rows.push_back({{"lambda", grid[i]}, {"F", F[i]}, {"dF", dF[i]}, {"ln_rho", log_multiplicator(F[i])}});
  out.write("discriminant.json", dump(rows));
  return 0;
}

GapSolverOptions solver_options(const Common& c) {
  GapSolverOptions o;
  o.ode = c.ode();
  return o;
}

int run_gap_eig(const Common& c, const std::string& potential_path, const std::string& perturbation_path,
                double lambda) {
  const auto V = load_potential(read_json(potential_path));
  const auto Q = load_perturbation(read_json(perturbation_path));
  const Output out(c.out_dir);
  const GapProblem problem(V, Q, lambda, solver_options(c));
  const auto e = problem.eigenfunction(problem.solve_coupling());
  std::ostringstream csv;
  write_eigenpair_csv(csv, e);
  if (out.to_directory()) {
    out.write("eigenfunction.csv", csv.str());
    out.write("summary.json", dump(summary_json(e)));
  } else {
    out.write("", c.format == "csv" ? csv.str() : dump(summary_json(e)));
  }
  return 0;
}

int run_bs_spectrum(const Common& c, const std::string& potential_path, const std::string& perturbation_path,
                    double lambda, int nodes, int count) {
  const auto V = load_potential(read_json(potential_path));
  const auto Q = load_perturbation(read_json(perturbation_path));
  const Output out(c.out_dir);
  const auto s = GapProblem(V, Q, lambda, solver_options(c)).birman_schwinger(nodes);
  const std::size_t n = std::min(s.mu.size(), std::size_t(count));
  if (c.format == "csv") {
    std::ostringstream os;
    os << "index,mu\n";
    for (std::size_t i = 0; i < n; ++i) os << i << ',' << format_number(s.mu[i]) << '\n';
    out.write("bs_spectrum.csv", os.str());
    return 0;
  }
  nlohmann::json j = {{"lambda", s.lambda}, {"grid_size", s.grid_size}};
  j["mu"] = std::vector<double>(s.mu.begin(), s.mu.begin() + std::ptrdiff_t(n));
  if (auto m = s.mu_max()) j["alpha"] = 1.0 / *m;
  out.write("bs_spectrum.json", dump(j));
  return 0;
}

int run_dirac_eig(const Common& c, double m, const std::string& well_path, const std::string& bracket) {
  if (!(m > 0)) throw UsageError("--mass must be positive");
  const auto W = load_matrix_perturbation(read_json(well_path));
  const Output out(c.out_dir);
  DiracOptions opts;
  opts.ode = c.ode();
  std::optional<std::pair<double, double>> br;
  if (!bracket.empty()) br = parse_pair(bracket);
  const auto ev = dirac_gap_eigenvalues(m, W, br, opts);
  std::vector<DiracEigenpair> pairs;
  for (double l : ev.eigenvalues) pairs.push_back(dirac_eigenfunction(m, W, l, opts));

  if (c.format == "csv") {
    std::ostringstream os;
    os << "lambda,rate_exact,fitted_delta,d_lambda\n";
    for (const auto& e : pairs)
      os << format_number(e.lambda) << ',' << format_number(e.rate_exact) << ',' << format_number(e.fitted_delta)
         << ',' << format_number(e.d_lambda) << '\n';
    out.write("dirac_eigenvalues.csv", os.str());
  } else {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& e : pairs) list.push_back(summary_json(e));
    out.write("dirac_eigenvalues.json", dump({{"m", m}, {"eigenvalues", list}, {"none_found", ev.none_found}}));
  }
  if (out.to_directory()) {
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      std::ostringstream os;
      write_dirac_csv(os, pairs[i]);
      out.write("dirac_eigenfunction_" + std::to_string(i) + ".csv", os.str());
    }
  }
  if (ev.none_found) std::cerr << "warning: no eigenvalue found in the bracket\n";
  return 0;
}

int run_gamma(const Common& c, const std::string& matrices_path) {
  const auto system = load_symbol_system(read_json(matrices_path));
  const Output out(c.out_dir);
  const auto r = analyze_symbol(system);
  if (c.format == "csv") {
    out.write("gamma.txt", format_number(r.gamma) + "\n");
    return 0;
  }
  out.write("gamma.json", dump({{"gamma", r.gamma},
                                {"gamma_argmax", std::vector<double>(r.gamma_argmax.begin(), r.gamma_argmax.end())},
                                {"ellipticity_margin", r.ellipticity_margin},
                                {"elliptic", r.elliptic}}));
  return 0;
}

int run_verify(const Common& c, const std::string& suite, const std::string& potential_path) {
  if (suite != "all" && std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end())
    throw UsageError("unknown suite '" + suite + "'");
  SuiteOptions opts;
  if (!potential_path.empty()) opts.potential = load_potential(read_json(potential_path));
  const Output out(c.out_dir);
  const Report r = run_suite(suite, opts);
  out.write("report_" + suite + ".json", r.dump());
  return r.any_fail() ? kExitFail : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Band structure, gap eigenvalues and eigenfunction decay for periodic and Dirac operators"};
  app.require_subcommand(1);

  Common common;
  std::string potential, perturbation, matrices, range, suite = "all", bracket, well;
  double lambda_max = 0.0, lambda = 0.0, grid_step = 0.05, mass = 1.0;
  int nodes = 2048, count = 10;

  auto* bands = app.add_subcommand("bands", "Band edges and open gaps up to --lambda-max");
  bands->add_option("--potential", potential, "Periodic potential JSON")->required()->check(CLI::ExistingFile);
  bands->add_option("--lambda-max", lambda_max, "Upper end of the scan")->required();
  bands->add_option("--grid-step", grid_step, "Initial scan spacing")->check(CLI::PositiveNumber);

  auto* disc = app.add_subcommand("discriminant", "F, F' and ln rho on a lambda grid");
  disc->add_option("--potential", potential, "Periodic potential JSON")->required()->check(CLI::ExistingFile);
  disc->add_option("--range", range, "start:stop:count")->required();

  auto* gap = app.add_subcommand("gap-eig", "Coupling and eigenfunction of V - alpha Q at a gap point");
  gap->add_option("--potential", potential, "Periodic potential JSON")->required()->check(CLI::ExistingFile);
  gap->add_option("--perturbation", perturbation, "Compact perturbation JSON")->required()->check(CLI::ExistingFile);
  gap->add_option("--lambda", lambda, "Spectral parameter inside a gap")->required();

  auto* bs = app.add_subcommand("bs-spectrum", "Birman-Schwinger eigenvalues at a gap point");
  bs->add_option("--potential", potential, "Periodic potential JSON")->required()->check(CLI::ExistingFile);
  bs->add_option("--perturbation", perturbation, "Compact perturbation JSON")->required()->check(CLI::ExistingFile);
  bs->add_option("--lambda", lambda, "Spectral parameter inside a gap")->required();
  bs->add_option("--nodes", nodes, "Quadrature nodes")->check(CLI::Range(16, 20000));
  bs->add_option("--count", count, "Number of eigenvalues to report")->check(CLI::PositiveNumber);

  auto* dirac = app.add_subcommand("dirac-eig", "Gap eigenvalues of the 1D Dirac operator");
  dirac->add_option("--mass", mass, "Mass m > 0");
  dirac->add_option("--well", well, "Matrix perturbation JSON")->required()->check(CLI::ExistingFile);
  dirac->add_option("--bracket", bracket, "lo:hi inside (-m, m)");

  auto* gam = app.add_subcommand("gamma", "Symbol norm gamma of a Hermitian matrix system");
  gam->add_option("--matrices", matrices, "Symbol system JSON")->required()->check(CLI::ExistingFile);

  auto* ver = app.add_subcommand("verify", "Run a verification suite and emit a JSON report");
  std::vector<std::string> suites = suite_names();
  suites.push_back("all");
  ver->add_option("--suite", suite, "Suite name")->check(CLI::IsMember(suites));
  ver->add_option("--potential", potential, "Override the suite's periodic potential")->check(CLI::ExistingFile);

  for (auto* sub : {bands, disc, gap, bs, dirac, gam}) common.attach(sub);
  common.attach(ver, false);  // reports are always JSON

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*bands) return run_bands(common, potential, lambda_max, grid_step);
    if (*disc) return run_discriminant(common, potential, range);
    if (*gap) return run_gap_eig(common, potential, perturbation, lambda);
    if (*bs) return run_bs_spectrum(common, potential, perturbation, lambda, nodes, count);
    if (*dirac) return run_dirac_eig(common, mass, well, bracket);
    if (*gam) return run_gamma(common, matrices);
    if (*ver) return run_verify(common, suite, potential);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DimensionMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitUsage;
}
