#pragma once

// Periodic potentials, compactly supported couplings and matrix-valued
// perturbations, plus their JSON form.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "spectral_decay/errors.hpp"

namespace spectral_decay {

struct ZeroRep {};

/// V(x) = mean + sum_k cos[k-1] cos(2 pi k x) + sin[k-1] sin(2 pi k x).
struct FourierRep {
  double mean = 0.0;
  std::vector<double> cos;
  std::vector<double> sin;
};

/// Right-continuous step function on [0,1): values[i] on [breaks[i], breaks[i+1]).
struct PiecewiseRep {
  std::vector<double> breaks;
  std::vector<double> values;
};

using Representation = std::variant<ZeroRep, FourierRep, PiecewiseRep>;

namespace detail {

inline void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw ValidationError(std::string(what) + " must be finite");
}

inline void validate(const Representation& rep) {
  if (const auto* f = std::get_if<FourierRep>(&rep)) {
    require_finite(f->mean, "mean");
    for (double c : f->cos) require_finite(c, "cos coefficient");
    for (double s : f->sin) require_finite(s, "sin coefficient");
  } else if (const auto* p = std::get_if<PiecewiseRep>(&rep)) {
    if (p->breaks.empty()) throw ValidationError("piecewise potential needs at least one breakpoint");
    if (p->breaks.size() != p->values.size())
      throw ValidationError("breaks and values must have equal length");
    if (p->breaks.front() != 0.0) throw ValidationError("first breakpoint must be 0");
    for (std::size_t i = 1; i < p->breaks.size(); ++i) {
      if (!(p->breaks[i] > p->breaks[i - 1]))
        throw ValidationError("breakpoints must be strictly increasing");
    }
    if (!(p->breaks.back() < 1.0)) throw ValidationError("breakpoints must lie in [0,1)");
    for (double v : p->values) require_finite(v, "piecewise value");
  }
}

// Evaluates a representation at t in [0,1]; t == 1 yields the left limit.
inline double eval_unit(const Representation& rep, double t) {
  return std::visit(
      [t](const auto& r) -> double {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, ZeroRep>) {
          return 0.0;
        } else if constexpr (std::is_same_v<R, FourierRep>) {
          constexpr double two_pi = 2.0 * std::numbers::pi;
          double v = r.mean;
          for (std::size_t k = 0; k < r.cos.size(); ++k) v += r.cos[k] * std::cos(two_pi * double(k + 1) * t);
          for (std::size_t k = 0; k < r.sin.size(); ++k) v += r.sin[k] * std::sin(two_pi * double(k + 1) * t);
          return v;
        } else {
          if (t >= 1.0) return r.values.back();
          auto it = std::upper_bound(r.breaks.begin(), r.breaks.end(), t);
          return r.values[std::size_t(it - r.breaks.begin()) - 1];
        }
      },
      rep);
}

}  // namespace detail

/// A real potential with V(x+1) = V(x).
class PeriodicPotential {
 public:
  PeriodicPotential() : rep_(ZeroRep{}) {}

  explicit PeriodicPotential(Representation rep) : rep_(std::move(rep)) { detail::validate(rep_); }

  static PeriodicPotential zero() { return PeriodicPotential(); }

  static PeriodicPotential fourier(double mean, std::vector<double> cos, std::vector<double> sin = {}) {
    return PeriodicPotential(FourierRep{mean, std::move(cos), std::move(sin)});
  }

  static PeriodicPotential piecewise(std::vector<double> breaks, std::vector<double> values) {
    return PeriodicPotential(PiecewiseRep{std::move(breaks), std::move(values)});
  }

  /// Period; fixed to 1. Other periods are handled by rescaling x -> x/T, lambda -> T^2 lambda.
  double period() const { return 1.0; }

  const Representation& representation() const { return rep_; }

  double operator()(double x) const {
    double t = x - std::floor(x);
    if (t >= 1.0) t = 0.0;
    return detail::eval_unit(rep_, t);
  }

  bool is_zero() const { return std::holds_alternative<ZeroRep>(rep_); }

  /// True when V is constant between breakpoints (zero or piecewise).
  bool is_piecewise_constant() const { return !std::holds_alternative<FourierRep>(rep_); }

  /// Upper bound on sup |V|, exact for zero and piecewise potentials.
  double max_abs() const {
    if (const auto* f = std::get_if<FourierRep>(&rep_)) {
      double s = std::abs(f->mean);
      for (double c : f->cos) s += std::abs(c);
      for (double c : f->sin) s += std::abs(c);
      return s;
    }
    if (const auto* p = std::get_if<PiecewiseRep>(&rep_)) {
      double s = 0.0;
      for (double v : p->values) s = std::max(s, std::abs(v));
      return s;
    }
    return 0.0;
  }

  /// Discontinuities of V strictly inside (x0, x1), ascending.
  std::vector<double> breakpoints_in(double x0, double x1) const {
    std::vector<double> out;
    const auto* p = std::get_if<PiecewiseRep>(&rep_);
    if (p == nullptr || !(x1 > x0)) return out;
    for (double cell = std::floor(x0); cell < x1; cell += 1.0) {
      for (double b : p->breaks) {
        const double x = cell + b;
        // a break at 0 is only a jump when the step function is not constant
        if (b == 0.0 && p->values.size() == 1) continue;
        if (x > x0 && x < x1) out.push_back(x);
      }
    }
    return out;
  }

 private:
  Representation rep_;
};

inline double evaluate(const PeriodicPotential& potential, double x) { return potential(x); }

/// Q = G^2 with G(x) = profile((x-a)/(b-a)) on [a,b] and 0 elsewhere.
class CompactPerturbation {
 public:
  CompactPerturbation(double a, double b, PeriodicPotential profile) : a_(a), b_(b), profile_(std::move(profile)) {
    if (!std::isfinite(a) || !std::isfinite(b) || !(b > a)) throw ValidationError("support must satisfy a < b");
    double peak = 0.0;
    constexpr int kChecks = 1000;
    for (int i = 0; i <= kChecks; ++i) {
      const double g = detail::eval_unit(profile_.representation(), double(i) / kChecks);
      if (g < -1e-12) throw ValidationError("profile G must be nonnegative on the support");
      peak = std::max(peak, g);
    }
    if (!(peak > 0.0)) throw ValidationError("Q must not vanish identically");
  }

  /// Q = 1 on [a,b].
  static CompactPerturbation indicator(double a, double b) {
    return CompactPerturbation(a, b, PeriodicPotential::piecewise({0.0}, {1.0}));
  }

  double lower() const { return a_; }
  double upper() const { return b_; }
  double width() const { return b_ - a_; }
  const PeriodicPotential& profile() const { return profile_; }

  double G(double x) const {
    if (x < a_ || x > b_) return 0.0;
    const double t = std::clamp((x - a_) / (b_ - a_), 0.0, 1.0);
    return detail::eval_unit(profile_.representation(), t);
  }

  double Q(double x) const {
    const double g = G(x);
    return g * g;
  }

  double operator()(double x) const { return Q(x); }

  bool is_piecewise_constant() const { return profile_.is_piecewise_constant(); }

  /// Support edges and interior profile jumps inside (x0, x1), ascending.
  std::vector<double> breakpoints_in(double x0, double x1) const {
    std::vector<double> out;
    auto push = [&](double x) {
      if (x > x0 && x < x1) out.push_back(x);
    };
    push(a_);
    if (const auto* p = std::get_if<PiecewiseRep>(&profile_.representation())) {
      for (std::size_t i = 1; i < p->breaks.size(); ++i) push(a_ + p->breaks[i] * width());
    }
    push(b_);
    return out;
  }

 private:
  double a_;
  double b_;
  PeriodicPotential profile_;
};

/// Hermitian 2x2 matrix-valued W, piecewise constant on [breaks[i], breaks[i+1]) with the
/// last piece ending at b; zero outside [a,b].
class MatrixPerturbation {
 public:
  MatrixPerturbation(double a, double b, std::vector<double> breaks, std::vector<Eigen::Matrix2cd> pieces)
      : a_(a), b_(b), breaks_(std::move(breaks)), pieces_(std::move(pieces)) {
    if (!(b > a)) throw ValidationError("support must satisfy a < b");
    if (breaks_.empty() || breaks_.size() != pieces_.size())
      throw ValidationError("one matrix per piece is required");
    if (breaks_.front() != a_) throw ValidationError("first piece must start at the support's lower edge");
    for (std::size_t i = 1; i < breaks_.size(); ++i) {
      if (!(breaks_[i] > breaks_[i - 1])) throw ValidationError("pieces must be strictly increasing");
    }
    if (!(breaks_.back() < b_)) throw ValidationError("pieces must start inside the support");
    for (const auto& w : pieces_) {
      if (!w.allFinite()) throw ValidationError("matrix entries must be finite");
      if ((w - w.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw ValidationError("W must be Hermitian");
    }
  }

  /// W = w * I on [a,b].
  static MatrixPerturbation scalar_well(double a, double b, double w) {
    return MatrixPerturbation(a, b, {a}, {Eigen::Matrix2cd::Identity() * w});
  }

  double lower() const { return a_; }
  double upper() const { return b_; }
  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<Eigen::Matrix2cd>& pieces() const { return pieces_; }

  Eigen::Matrix2cd operator()(double x) const {
    if (x < a_ || x >= b_) return Eigen::Matrix2cd::Zero();
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    return pieces_[std::size_t(it - breaks_.begin()) - 1];
  }

  /// End of piece i.
  double piece_end(std::size_t i) const { return i + 1 < breaks_.size() ? breaks_[i + 1] : b_; }

  /// Integral over the support of the sigma_1 coefficient Re(W12).
  double sigma1_integral() const {
    double s = 0.0;
    for (std::size_t i = 0; i < pieces_.size(); ++i) s += pieces_[i](0, 1).real() * (piece_end(i) - breaks_[i]);
    return s;
  }

  bool is_zero() const {
    return std::all_of(pieces_.begin(), pieces_.end(), [](const auto& w) { return w.isZero(0.0); });
  }

 private:
  double a_;
  double b_;
  std::vector<double> breaks_;
  std::vector<Eigen::Matrix2cd> pieces_;
};

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace detail {

using nlohmann::json;

inline const json& require_field(const json& doc, const char* key) {
  if (!doc.is_object()) throw SchemaError("expected an object");
  auto it = doc.find(key);
  if (it == doc.end()) throw SchemaError(std::string("missing field '") + key + "'");
  return *it;
}

inline double number(const json& v, const char* what) {
  if (!v.is_number()) throw SchemaError(std::string(what) + " must be a number");
  return v.get<double>();
}

inline std::vector<double> number_list(const json& v, const char* what) {
  if (!v.is_array()) throw SchemaError(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(number(e, what));
  return out;
}

inline std::vector<double> optional_list(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) return {};
  return number_list(*it, key);
}

inline std::complex<double> complex_entry(const json& v) {
  if (!v.is_array() || v.size() != 2) throw SchemaError("complex entries must be [re, im] pairs");
  return {number(v[0], "re"), number(v[1], "im")};
}

}  // namespace detail

inline PeriodicPotential load_potential(const nlohmann::json& doc) {
  using namespace detail;
  const auto& type = require_field(doc, "type");
  if (!type.is_string()) throw SchemaError("'type' must be a string");
  const auto name = type.get<std::string>();
  if (name == "zero") return PeriodicPotential::zero();
  if (name == "fourier") {
    double mean = 0.0;
    if (auto it = doc.find("mean"); it != doc.end()) mean = number(*it, "mean");
    return PeriodicPotential::fourier(mean, optional_list(doc, "cos"), optional_list(doc, "sin"));
  }
  if (name == "piecewise") {
    return PeriodicPotential::piecewise(number_list(require_field(doc, "breaks"), "breaks"),
                                        number_list(require_field(doc, "values"), "values"));
  }
  throw SchemaError("unknown potential type '" + name + "'");
}

inline PeriodicPotential load_potential(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(e.what());
  }
  return load_potential(doc);
}

inline nlohmann::json to_json(const PeriodicPotential& potential) {
  return std::visit(
      [](const auto& r) -> nlohmann::json {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, ZeroRep>) {
          return {{"type", "zero"}};
        } else if constexpr (std::is_same_v<R, FourierRep>) {
          return {{"type", "fourier"}, {"mean", r.mean}, {"cos", r.cos}, {"sin", r.sin}};
        } else {
          return {{"type", "piecewise"}, {"breaks", r.breaks}, {"values", r.values}};
        }
      },
      potential.representation());
}

inline CompactPerturbation load_perturbation(const nlohmann::json& doc) {
  using namespace detail;
  const auto support = number_list(require_field(doc, "support"), "support");
  if (support.size() != 2) throw SchemaError("support must be [a, b]");
  return CompactPerturbation(support[0], support[1], load_potential(require_field(doc, "profile")));
}

inline nlohmann::json to_json(const CompactPerturbation& q) {
  return {{"support", {q.lower(), q.upper()}}, {"profile", to_json(q.profile())}};
}

/// {"support":[a,b],"breaks":[...],"matrices":[[[re,im] x 4], ...]} with row-major 2x2 entries.
/// "breaks" defaults to [a].
inline MatrixPerturbation load_matrix_perturbation(const nlohmann::json& doc) {
  using namespace detail;
  const auto support = number_list(require_field(doc, "support"), "support");
  if (support.size() != 2) throw SchemaError("support must be [a, b]");
  std::vector<double> breaks = optional_list(doc, "breaks");
  if (breaks.empty()) breaks.push_back(support[0]);
  const auto& mats = require_field(doc, "matrices");
  if (!mats.is_array()) throw SchemaError("'matrices' must be an array");
  std::vector<Eigen::Matrix2cd> pieces;
  for (const auto& m : mats) {
    if (!m.is_array() || m.size() != 4) throw SchemaError("each matrix needs 4 row-major entries");
    Eigen::Matrix2cd w;
    for (int k = 0; k < 4; ++k) w(k / 2, k % 2) = complex_entry(m[std::size_t(k)]);
    pieces.push_back(w);
  }
  return MatrixPerturbation(support[0], support[1], std::move(breaks), std::move(pieces));
}

}  // namespace spectral_decay
