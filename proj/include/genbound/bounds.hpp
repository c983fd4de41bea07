#ifndef GENBOUND_BOUNDS_HPP
#define GENBOUND_BOUNDS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "genbound/analysis.hpp"
#include "genbound/chain.hpp"
#include "genbound/empirical.hpp"
#include "genbound/error.hpp"
#include "genbound/random.hpp"

namespace genbound {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ------------------------------------------------------------ margin loss

/// Piecewise-linear loss given by knots, constant beyond the first and last knot.
/// The indicator 1{x <= 0} is kept as its own kind (not Lipschitz).
class MarginLoss {
 public:
  enum class Kind { RampUpper, RampLower, Indicator, Custom };

  static MarginLoss ramp_upper() { return MarginLoss(Kind::RampUpper, {{0.0, 1.0}, {1.0, 0.0}}); }
  static MarginLoss ramp_lower() { return MarginLoss(Kind::RampLower, {{-1.0, 1.0}, {0.0, 0.0}}); }
  static MarginLoss indicator() { return MarginLoss(Kind::Indicator, {}); }
  static MarginLoss custom(std::vector<std::pair<double, double>> knots) {
    require(!knots.empty(), ErrorCode::InvalidLoss, "custom loss needs at least one knot", "phi");
    for (std::size_t i = 0; i < knots.size(); ++i) {
      require(std::isfinite(knots[i].first) && std::isfinite(knots[i].second), ErrorCode::InvalidLoss,
              "non-finite knot", "phi");
      if (i > 0)
        require(knots[i].first > knots[i - 1].first, ErrorCode::InvalidLoss, "knots must be strictly increasing in x",
                "phi");
    }
    return MarginLoss(Kind::Custom, std::move(knots));
  }

  Kind kind() const { return kind_; }
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }
  double lipschitz() const { return lipschitz_; }

  double operator()(double x) const {
    if (kind_ == Kind::Indicator) return x <= 0.0 ? 1.0 : 0.0;
    if (x <= knots_.front().first) return knots_.front().second;
    if (x >= knots_.back().first) return knots_.back().second;
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), x,
                                     [](double v, const auto& k) { return v < k.first; });
    const auto& [x1, y1] = *it;
    const auto& [x0, y0] = *(it - 1);
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
  }

  bool nonincreasing() const {
    for (std::size_t i = 1; i < knots_.size(); ++i)
      if (knots_[i].second > knots_[i - 1].second) return false;
    return true;
  }

  /// phi(x) >= 1{x <= 0} everywhere. On each half-line the extremes of a
  /// piecewise-linear phi sit at knots, at 0, or on the flat extensions.
  bool is_upper() const {
    if (kind_ == Kind::Indicator) return true;
    double left = std::min(knots_.front().second, (*this)(0.0));
    double right = std::min(knots_.back().second, (*this)(0.0));
    for (const auto& [x, y] : knots_) (x <= 0.0 ? left : right) = std::min(x <= 0.0 ? left : right, y);
    return left >= 1.0 && right >= 0.0;
  }

  /// phi(x) <= 1{x <= 0} everywhere.
  bool is_lower() const {
    if (kind_ == Kind::Indicator) return true;
    double left = std::max(knots_.front().second, (*this)(0.0));
    double right = std::max(knots_.back().second, (*this)(0.0));
    for (const auto& [x, y] : knots_) (x <= 0.0 ? left : right) = std::max(x <= 0.0 ? left : right, y);
    return left <= 1.0 && right <= 0.0;
  }

  std::string name() const {
    switch (kind_) {
      case Kind::RampUpper: return "ramp-upper";
      case Kind::RampLower: return "ramp-lower";
      case Kind::Indicator: return "indicator";
      case Kind::Custom: return "custom";
    }
    return "custom";
  }

 private:
  MarginLoss(Kind kind, std::vector<std::pair<double, double>> knots) : kind_(kind), knots_(std::move(knots)) {
    if (kind_ == Kind::Indicator) {
      lipschitz_ = kInf;
      return;
    }
    lipschitz_ = 0.0;
    for (std::size_t i = 1; i < knots_.size(); ++i)
      lipschitz_ = std::max(lipschitz_, std::abs(knots_[i].second - knots_[i - 1].second) /
                                            (knots_[i].first - knots_[i - 1].first));
  }

  Kind kind_;
  std::vector<std::pair<double, double>> knots_;
  double lipschitz_ = 0.0;
};

/// phi_k(x) = phi(x / 2^{-k}) for x >= 0 and phi(x / 2^{-(k-1)}) for x < 0, k = 1..K.
inline std::vector<MarginLoss> dyadic_family(const MarginLoss& phi, std::size_t K) {
  require(phi.kind() != MarginLoss::Kind::Indicator, ErrorCode::InvalidLoss, "dyadic family needs a Lipschitz phi",
          "phi");
  std::vector<MarginLoss> out;
  for (std::size_t k = 1; k <= K; ++k) {
    const double dk = std::ldexp(1.0, -static_cast<int>(k));
    const double dk1 = std::ldexp(1.0, -static_cast<int>(k) + 1);
    std::vector<std::pair<double, double>> knots;
    for (const auto& [x, y] : phi.knots())
      if (x < 0.0) knots.emplace_back(x * dk1, y);
    knots.emplace_back(0.0, phi(0.0));
    for (const auto& [x, y] : phi.knots())
      if (x > 0.0) knots.emplace_back(x * dk, y);
    out.push_back(MarginLoss::custom(std::move(knots)));
  }
  return out;
}

// ------------------------------------------------------ symmetrization

struct BoundTerms {
  double A_n = 0.0;
  double A_tilde_n = 0.0;
  double B_n = 0.0;
  double n = 0.0, M = 0.0, lambda = 0.0, tau_min = 0.0, chi_div = 0.0;
  bool gap_degenerate = false;
};

/// sqrt(2M/(n(1-lambda)) + 64 M^2/(n^2(1-lambda)^2) chi); B_n is this at M = 1.
inline double a_term(double M, double n, double lambda, double chi_div) {
  if (lambda >= 1.0) return kInf;
  const double g = 1.0 - lambda;
  return std::sqrt(2.0 * M / (n * g) + 64.0 * M * M / (n * n * g * g) * chi_div);
}

inline double b_term(double n, double lambda, double chi_div) { return a_term(1.0, n, lambda, chi_div); }

inline BoundTerms symmetrization_terms(double M, double n, double lambda, double chi_div, double tau_min) {
  require(n >= 1.0, ErrorCode::InvalidInput, "n must be at least 1", "n");
  require(M >= 0.0 && std::isfinite(M), ErrorCode::InvalidInput, "M must be finite and >= 0", "M");
  require(lambda >= 0.0, ErrorCode::InvalidInput, "lambda must be >= 0", "lambda");
  require(chi_div >= 0.0, ErrorCode::InvalidInput, "chi_div must be >= 0", "chi_div");
  require(tau_min >= 0.0, ErrorCode::InvalidInput, "tau_min must be >= 0", "tau_min");
  BoundTerms b;
  b.n = n;
  b.M = M;
  b.lambda = lambda;
  b.tau_min = tau_min;
  b.chi_div = chi_div;
  b.gap_degenerate = lambda >= 1.0;
  b.A_n = a_term(M, n, lambda, chi_div);
  b.B_n = b_term(n, lambda, chi_div);
  b.A_tilde_n = M / (2.0 * n) * (std::sqrt(2.0 * tau_min * n * std::log(n)) + std::sqrt(n) + 4.0);
  return b;
}

// ---------------------------------------------------------- bound report

/// One candidate in the infimum; `param` is delta or the family index k.
struct BoundRow {
  double param = 0.0;
  double empirical = 0.0;
  double empirical_stderr = 0.0;
  double complexity = 0.0;
  double loglog = 0.0;
  double tail = 0.0;
  double b_n = 0.0;
  double extra = 0.0;
  double total = 0.0;
};

/// Fixed summation order; `total` is always this value.
inline double row_total(const BoundRow& r) {
  return ((((r.empirical + r.complexity) + r.loglog) + r.tail) + r.b_n) + r.extra;
}

struct FunctionBound {
  std::string name;
  std::vector<BoundRow> rows;
  double bound = kInf;
  double argmin = 0.0;
};

struct BoundReport {
  std::string theorem;
  std::string param_name = "delta";
  std::size_t n = 0;
  double t = 0.0;
  std::vector<double> grid;
  std::vector<FunctionBound> functions;
  std::size_t reported = 0;  // function with the largest bound
  double bound = kInf;
  double bound_clamped = 1.0;
  double argmin = 0.0;
  double tail = 0.0;         // failure probability
  double confidence = 0.0;   // 1 - tail, clamped to [0, 1]
  std::vector<std::pair<std::string, double>> inputs;
  std::vector<std::string> caveats;
};

inline double clamp01(double x) { return std::isnan(x) ? x : std::clamp(x, 0.0, 1.0); }

/// Fills totals, per-function minima, the reported function and the clamped values.
inline void finalize(BoundReport& rep) {
  double worst = -kInf;
  for (std::size_t f = 0; f < rep.functions.size(); ++f) {
    auto& fb = rep.functions[f];
    fb.bound = kInf;
    fb.argmin = fb.rows.empty() ? 0.0 : fb.rows.front().param;
    for (auto& r : fb.rows) {
      r.total = row_total(r);
      if (r.total < fb.bound) {
        fb.bound = r.total;
        fb.argmin = r.param;
      }
    }
    if (fb.bound > worst) {
      worst = fb.bound;
      rep.reported = f;
    }
  }
  rep.bound = rep.functions[rep.reported].bound;
  rep.argmin = rep.functions[rep.reported].argmin;
  rep.bound_clamped = clamp01(rep.bound);
  rep.confidence = clamp01(1.0 - rep.tail);
}

inline std::vector<double> dyadic_grid(int kmax = 20) {
  std::vector<double> g;
  for (int k = 0; k <= kmax; ++k) g.push_back(std::ldexp(1.0, -k));
  return g;
}

inline void validate_grid(const std::vector<double>& grid) {
  require(!grid.empty(), ErrorCode::InvalidGrid, "delta grid is empty", "delta_grid");
  for (double d : grid)
    require(std::isfinite(d) && d > 0.0 && d <= 1.0, ErrorCode::InvalidGrid,
            "delta " + detail::fmt(d) + " is outside (0,1]", "delta_grid");
}

inline double loglog2(double delta) { return std::log(std::log2(2.0 / delta)); }

/// Occupation weights of a trajectory: P_n as a vector over states.
inline Eigen::VectorXd pn_weights(const Trajectory& traj) { return occupation(traj) / static_cast<double>(traj.size()); }

inline double pn_phi(const Eigen::VectorXd& f, const Eigen::VectorXd& w, const MarginLoss& phi, double delta) {
  double acc = 0.0;
  for (Eigen::Index x = 0; x < f.size(); ++x)
    if (w(x) != 0.0) acc += w(x) * phi(f(x) / delta);
  return acc;
}

inline double pn_band(const Eigen::VectorXd& f, const Eigen::VectorXd& w, double delta) {
  double acc = 0.0;
  for (Eigen::Index x = 0; x < f.size(); ++x)
    if (std::abs(f(x)) <= delta) acc += w(x);
  return acc;
}

inline double thm1_tail(double t) { return std::numbers::pi * std::numbers::pi / 3.0 * std::exp(-2.0 * t * t); }
inline double two_sided_tail(double t) { return 2.0 * thm1_tail(t); }

namespace detail {

inline void check_inputs(const FunctionClass& margins, const Trajectory& traj, double t) {
  require(margins.size() >= 1, ErrorCode::InvalidInput, "function class is empty", "functions");
  require(margins.states() == traj.num_states, ErrorCode::DimensionMismatch,
          "class and trajectory disagree in state count", "values");
  require(traj.size() >= 1, ErrorCode::InvalidInput, "trajectory is empty", "trajectory");
  require(std::isfinite(t) && t > 0.0, ErrorCode::InvalidInput, "t must be positive", "t");
}

inline void markov_inputs(BoundReport& rep, const ChainAnalysis& a, double B_n) {
  rep.inputs.emplace_back("lambda", a.lambda());
  rep.inputs.emplace_back("chi_div", a.chi_div());
  rep.inputs.emplace_back("tau_min", a.tau());
  rep.inputs.emplace_back("B_n", B_n);
  if (a.lambda() >= 1.0) rep.caveats.push_back("lambda >= 1: B_n is infinite (GapDegenerate)");
}

/// Shared body of every delta-indexed margin bound.
template <class EmpiricalFn, class ComplexityFn>
BoundReport delta_bound(std::string theorem, const FunctionClass& margins, const ChainAnalysis& a,
                        const Trajectory& traj, double t, const std::vector<double>& grid, double tail_t,
                        EmpiricalFn empirical, ComplexityFn complexity, double extra) {
  validate_grid(grid);
  BoundReport rep;
  rep.theorem = std::move(theorem);
  rep.n = traj.size();
  rep.t = t;
  rep.grid = grid;
  const double n = static_cast<double>(traj.size());
  const double root = std::sqrt(a.tau() / n);
  const double B_n = b_term(n, a.lambda(), a.chi_div());
  const Eigen::VectorXd w = pn_weights(traj);
  for (Eigen::Index f = 0; f < margins.values.rows(); ++f) {
    FunctionBound fb;
    fb.name = f < static_cast<Eigen::Index>(margins.names.size()) ? margins.names[f] : "f" + std::to_string(f);
    const Eigen::VectorXd vals = margins.values.row(f).transpose();
    for (double d : grid) {
      BoundRow r;
      r.param = d;
      r.empirical = empirical(vals, w, d, r);
      r.complexity = complexity(d);
      r.loglog = std::sqrt(loglog2(d)) * root;
      r.tail = tail_t * root;
      r.b_n = B_n;
      r.extra = extra;
      fb.rows.push_back(r);
    }
    rep.functions.push_back(std::move(fb));
  }
  markov_inputs(rep, a, B_n);
  rep.inputs.emplace_back("n", n);
  rep.inputs.emplace_back("t", t);
  return rep;
}

}  // namespace detail

/// inf over delta of P_n phi(f/delta) + complexity + (t + sqrt(log log2(2/delta))) sqrt(tau/n) + B_n
/// (+ 2/sqrt(n) for the Gaussian flavor), holding for all f with probability 1 - (pi^2/3)e^{-2t^2}.
inline BoundReport bound_thm1(const FunctionClass& margins, const ChainAnalysis& a, const Trajectory& traj,
                              const MarginLoss& phi, double t, const std::vector<double>& grid,
                              ComplexityKind flavor, const ComplexityEstimate& complexity) {
  detail::check_inputs(margins, traj, t);
  require(phi.is_upper(), ErrorCode::InvalidLoss, "phi must dominate the indicator of (-inf,0]", "phi");
  require(phi.nonincreasing(), ErrorCode::InvalidLoss, "phi must be nonincreasing", "phi");
  const double L = phi.lipschitz();
  const double n = static_cast<double>(traj.size());
  const bool rad = flavor == ComplexityKind::Rademacher;
  const double c = complexity.value;
  auto rep = detail::delta_bound(
      rad ? "thm1-rademacher" : "thm1-gaussian", margins, a, traj, t, grid, t,
      [&](const Eigen::VectorXd& f, const Eigen::VectorXd& w, double d, BoundRow&) { return pn_phi(f, w, phi, d); },
      [&](double d) { return rad ? 8.0 * L / d * c : 2.0 * L * std::sqrt(2.0 * std::numbers::pi) / d * c; },
      rad ? 0.0 : 2.0 / std::sqrt(n));
  rep.inputs.emplace_back("L_phi", L);
  rep.inputs.emplace_back(rad ? "R_n" : "G_n", c);
  rep.tail = thm1_tail(t);
  finalize(rep);
  return rep;
}

/// Countable family: inf over k of P_n phi_k(f) + 4 L(phi_k) R_n + (t + sqrt(log k)) sqrt(tau/n) + B_n.
inline BoundReport bound_family(const FunctionClass& margins, const ChainAnalysis& a, const Trajectory& traj,
                                const std::vector<MarginLoss>& phis, double t, const ComplexityEstimate& R_n) {
  detail::check_inputs(margins, traj, t);
  require(!phis.empty(), ErrorCode::InvalidLoss, "loss family is empty", "phis");
  for (std::size_t k = 0; k < phis.size(); ++k)
    require(phis[k].is_upper(), ErrorCode::InvalidLoss,
            "family member " + std::to_string(k + 1) + " does not dominate the indicator", "phis");
  BoundReport rep;
  rep.theorem = "family";
  rep.param_name = "k";
  rep.n = traj.size();
  rep.t = t;
  const double n = static_cast<double>(traj.size());
  const double root = std::sqrt(a.tau() / n);
  const double B_n = b_term(n, a.lambda(), a.chi_div());
  const Eigen::VectorXd w = pn_weights(traj);
  for (std::size_t k = 1; k <= phis.size(); ++k) rep.grid.push_back(static_cast<double>(k));
  for (Eigen::Index f = 0; f < margins.values.rows(); ++f) {
    FunctionBound fb;
    fb.name = margins.names.size() > static_cast<std::size_t>(f) ? margins.names[f] : "f" + std::to_string(f);
    const Eigen::VectorXd vals = margins.values.row(f).transpose();
    for (std::size_t k = 1; k <= phis.size(); ++k) {
      BoundRow r;
      r.param = static_cast<double>(k);
      r.empirical = pn_phi(vals, w, phis[k - 1], 1.0);
      r.complexity = 4.0 * phis[k - 1].lipschitz() * R_n.value;
      r.loglog = std::sqrt(std::log(static_cast<double>(k))) * root;
      r.tail = t * root;
      r.b_n = B_n;
      fb.rows.push_back(r);
    }
    rep.functions.push_back(std::move(fb));
  }
  detail::markov_inputs(rep, a, B_n);
  rep.inputs.emplace_back("n", n);
  rep.inputs.emplace_back("t", t);
  rep.inputs.emplace_back("R_n", R_n.value);
  rep.tail = thm1_tail(t);
  finalize(rep);
  return rep;
}

/// Bound on |P_n{f<=0} - P{f<=0}|: inf over delta of P_n{|f|<=delta} + Delta_n(F;delta) + t sqrt(tau/n).
inline BoundReport bound_two_sided(const FunctionClass& margins, const ChainAnalysis& a, const Trajectory& traj,
                                   double t, const std::vector<double>& grid, const ComplexityEstimate& R_n) {
  detail::check_inputs(margins, traj, t);
  auto rep = detail::delta_bound(
      "two-sided", margins, a, traj, t, grid, t,
      [&](const Eigen::VectorXd& f, const Eigen::VectorXd& w, double d, BoundRow&) { return pn_band(f, w, d); },
      [&](double d) { return 8.0 / d * R_n.value; }, 0.0);
  rep.inputs.emplace_back("R_n", R_n.value);
  rep.tail = two_sided_tail(t);
  finalize(rep);
  return rep;
}

/// t_alpha = sqrt((1/2) log(pi^2/(3 alpha))), the level at which the thm1 tail (pi^2/3)e^{-2t^2} equals alpha.
inline double t_alpha(double alpha) {
  require(alpha > 0.0 && alpha < 1.0, ErrorCode::InvalidInput, "alpha must lie in (0,1)", "alpha");
  const double inner = 0.5 * std::log(std::numbers::pi * std::numbers::pi / (3.0 * alpha));
  return std::sqrt(std::max(inner, 0.0));
}

/// Voting classifiers: P_n{f<=delta} + (8C/delta) sqrt(V/n) + B_n + (t_alpha + sqrt(log log2(2/delta))) sqrt(tau/n).
inline BoundReport bound_pac_vc(double V_H, double C, double alpha, const FunctionClass& margins,
                                const ChainAnalysis& a, const Trajectory& traj, const std::vector<double>& grid) {
  require(V_H >= 1.0, ErrorCode::InvalidInput, "VC dimension must be at least 1", "V_H");
  require(C > 0.0 && std::isfinite(C), ErrorCode::InvalidInput, "C must be positive", "C");
  const double ta = t_alpha(alpha);
  require(margins.states() == traj.num_states, ErrorCode::DimensionMismatch,
          "class and trajectory disagree in state count", "values");
  const double n = static_cast<double>(traj.size());
  auto rep = detail::delta_bound(
      "pac-vc", margins, a, traj, ta, grid, ta,
      [&](const Eigen::VectorXd& f, const Eigen::VectorXd& w, double d, BoundRow&) {
        double acc = 0.0;
        for (Eigen::Index x = 0; x < f.size(); ++x)
          if (f(x) <= d) acc += w(x);
        return acc;
      },
      [&](double d) { return 8.0 * C / d * std::sqrt(V_H / n); }, 0.0);
  rep.inputs.emplace_back("V_H", V_H);
  rep.inputs.emplace_back("C", C);
  rep.inputs.emplace_back("alpha", alpha);
  rep.caveats.push_back("C is not determined by the theory; the value used is a user input");
  rep.tail = alpha;
  finalize(rep);
  return rep;
}

/// prod_j (2 L_j b_j + 1).
inline double layered_factor(const std::vector<double>& L, const std::vector<double>& b) {
  require(!L.empty() && L.size() == b.size(), ErrorCode::DimensionMismatch,
          "need one Lipschitz constant and one budget per layer", "layers");
  double prod = 1.0;
  for (std::size_t j = 0; j < L.size(); ++j) {
    require(L[j] >= 0.0 && b[j] >= 0.0, ErrorCode::InvalidInput, "Lipschitz constants and budgets must be >= 0",
            "layers[" + std::to_string(j) + "]");
    prod *= 2.0 * L[j] * b[j] + 1.0;
  }
  return prod;
}

/// Gaussian-flavor margin bound with complexity (2 sqrt(2 pi) L(phi)/delta) prod(2 L_j b_j + 1) G_n(H).
inline BoundReport bound_deep_layered(const std::vector<double>& L, const std::vector<double>& b,
                                      const ComplexityEstimate& G_base, const MarginLoss& phi, double t,
                                      const std::vector<double>& grid, const ChainAnalysis& a,
                                      const FunctionClass& margins, const Trajectory& traj) {
  detail::check_inputs(margins, traj, t);
  require(phi.is_upper(), ErrorCode::InvalidLoss, "phi must dominate the indicator of (-inf,0]", "phi");
  const double factor = layered_factor(L, b);
  const double Lphi = phi.lipschitz();
  const double n = static_cast<double>(traj.size());
  auto rep = detail::delta_bound(
      "deep-layered", margins, a, traj, t, grid, t,
      [&](const Eigen::VectorXd& f, const Eigen::VectorXd& w, double d, BoundRow&) { return pn_phi(f, w, phi, d); },
      [&](double d) { return 2.0 * std::sqrt(2.0 * std::numbers::pi) * Lphi / d * factor * G_base.value; },
      2.0 / std::sqrt(n));
  rep.inputs.emplace_back("layer_factor", factor);
  rep.inputs.emplace_back("G_n_base", G_base.value);
  rep.inputs.emplace_back("L_phi", Lphi);
  rep.tail = thm1_tail(t);
  finalize(rep);
  return rep;
}

/// zeta(alpha) for alpha > 1: backward partial sum to 10^6 plus an Euler-Maclaurin tail.
inline double riemann_zeta(double alpha) {
  if (!(alpha > 1.0)) return kInf;
  constexpr int N = 1000000;
  double s = 0.0;
  for (int k = N; k >= 1; --k) s += std::pow(static_cast<double>(k), -alpha);
  const double dN = static_cast<double>(N);
  // sum_{k>N} k^{-a} = N^{1-a}/(a-1) - N^{-a}/2 + a N^{-a-1}/12 - ...
  s += std::pow(dN, 1.0 - alpha) / (alpha - 1.0) - 0.5 * std::pow(dN, -alpha) + alpha / 12.0 * std::pow(dN, -alpha - 1.0);
  return s;
}

/// Adaptive network bound: complexity (2 sqrt(2 pi) L(phi)/delta) Lambda(f) G_n(H),
/// tail (t + Gamma_alpha(f) + sqrt(log log2(2/delta))) sqrt(tau/n), plus 2/sqrt(n) and B_n.
inline BoundReport bound_deep_adaptive(double Lambda, double Gamma_alpha, double alpha,
                                       const ComplexityEstimate& G_base, const MarginLoss& phi, double t,
                                       const std::vector<double>& grid, const ChainAnalysis& a,
                                       const FunctionClass& margins, const Trajectory& traj) {
  detail::check_inputs(margins, traj, t);
  require(phi.is_upper(), ErrorCode::InvalidLoss, "phi must dominate the indicator of (-inf,0]", "phi");
  const double z = riemann_zeta(alpha);
  require(z < 1.5, ErrorCode::ZetaConstraint, "zeta(" + detail::fmt(alpha) + ") = " + detail::fmt(z) + " is not below 3/2",
          "alpha");
  const double Lphi = phi.lipschitz();
  const double n = static_cast<double>(traj.size());
  auto rep = detail::delta_bound(
      "deep-adaptive", margins, a, traj, t, grid, t + Gamma_alpha,
      [&](const Eigen::VectorXd& f, const Eigen::VectorXd& w, double d, BoundRow&) { return pn_phi(f, w, phi, d); },
      [&](double d) { return 2.0 * std::sqrt(2.0 * std::numbers::pi) * Lphi / d * Lambda * G_base.value; },
      2.0 / std::sqrt(n));
  rep.inputs.emplace_back("Lambda", Lambda);
  rep.inputs.emplace_back("Gamma_alpha", Gamma_alpha);
  rep.inputs.emplace_back("alpha", alpha);
  rep.inputs.emplace_back("zeta_alpha", z);
  rep.inputs.emplace_back("G_n_base", G_base.value);
  rep.tail = thm1_tail(t) / (3.0 - 2.0 * z);
  finalize(rep);
  return rep;
}

// ----------------------------------------------------------------- Bayes

struct BayesOptions {
  std::optional<std::size_t> w_samples;  // Monte Carlo over W when set
  std::uint64_t seed = kDefaultSeed;
  ComplexityKind flavor = ComplexityKind::Rademacher;
};

/// Margin bound for f(x, w) averaged over the prior. `cls` has one column per
/// (x, w) pair in x-major order; `lifted` analyses the product chain with the prior.
inline BoundReport bound_bayes(const FunctionClass& cls, const Eigen::VectorXd& prior, const MarginLoss& phi,
                               double t, const std::vector<double>& grid, const Trajectory& traj,
                               const ChainAnalysis& lifted, const ComplexityEstimate& complexity,
                               const BayesOptions& opt = {}) {
  require_distribution(prior, "prior");
  const std::size_t W = static_cast<std::size_t>(prior.size());
  require(cls.states() == traj.num_states * W, ErrorCode::DimensionMismatch,
          "class needs |S|*|W| = " + std::to_string(traj.num_states * W) + " values", "values");
  require(std::isfinite(t) && t > 0.0, ErrorCode::InvalidInput, "t must be positive", "t");
  require(phi.is_upper(), ErrorCode::InvalidLoss, "phi must dominate the indicator of (-inf,0]", "phi");
  validate_grid(grid);
  const double L = phi.lipschitz();
  const double n = static_cast<double>(traj.size());
  const bool rad = opt.flavor == ComplexityKind::Rademacher;

  // Prior draws for every (sample, position), shared by all deltas.
  std::vector<std::vector<int>> draws;
  if (opt.w_samples) {
    require(*opt.w_samples >= 2, ErrorCode::InvalidInput, "need at least 2 prior samples", "w_samples");
    const ChainSampler prior_sampler(Eigen::MatrixXd::Zero(1, 1), prior);
    draws.resize(*opt.w_samples);
    for (std::size_t j = 0; j < draws.size(); ++j) {
      SplitMix64 rng = SplitMix64::stream(opt.seed, j);
      draws[j].resize(traj.size());
      for (auto& w : draws[j]) w = prior_sampler.initial(rng);
    }
  }

  BoundReport rep;
  rep.theorem = rad ? "bayes-rademacher" : "bayes-gaussian";
  rep.n = traj.size();
  rep.t = t;
  rep.grid = grid;
  const double root = std::sqrt(lifted.tau() / n);
  const double B_n = b_term(n, lifted.lambda(), lifted.chi_div());
  const Eigen::VectorXd occ = occupation(traj);
  for (Eigen::Index f = 0; f < cls.values.rows(); ++f) {
    FunctionBound fb;
    fb.name = cls.names.size() > static_cast<std::size_t>(f) ? cls.names[f] : "f" + std::to_string(f);
    for (double d : grid) {
      BoundRow r;
      r.param = d;
      if (!opt.w_samples) {
        double acc = 0.0;
        for (std::size_t x = 0; x < traj.num_states; ++x) {
          if (occ(static_cast<Eigen::Index>(x)) == 0.0) continue;
          double inner = 0.0;
          for (std::size_t w = 0; w < W; ++w)
            inner += prior(static_cast<Eigen::Index>(w)) * phi(cls.values(f, static_cast<Eigen::Index>(x * W + w)) / d);
          acc += occ(static_cast<Eigen::Index>(x)) * inner;
        }
        r.empirical = acc / n;
      } else {
        std::vector<double> per_sample(draws.size());
        for (std::size_t j = 0; j < draws.size(); ++j) {
          double acc = 0.0;
          for (std::size_t i = 0; i < traj.size(); ++i)
            acc += phi(cls.values(f, static_cast<Eigen::Index>(static_cast<std::size_t>(traj.indices[i]) * W + draws[j][i])) / d);
          per_sample[j] = acc / n;
        }
        const auto m = mean_and_stderr(per_sample);
        r.empirical = m.mean;
        r.empirical_stderr = m.stderr_;
      }
      r.complexity = rad ? 8.0 * L / d * complexity.value
                         : 2.0 * L * std::sqrt(2.0 * std::numbers::pi) / d * complexity.value;
      r.loglog = std::sqrt(loglog2(d)) * root;
      r.tail = t * root;
      r.b_n = B_n;
      r.extra = rad ? 0.0 : 2.0 / std::sqrt(n);
      fb.rows.push_back(r);
    }
    rep.functions.push_back(std::move(fb));
  }
  detail::markov_inputs(rep, lifted, B_n);
  rep.inputs.emplace_back("n", n);
  rep.inputs.emplace_back("t", t);
  rep.inputs.emplace_back("W", static_cast<double>(W));
  rep.inputs.emplace_back(rad ? "R_n" : "G_n", complexity.value);
  if (opt.w_samples) rep.caveats.push_back("empirical term is a Monte Carlo average over prior draws");
  rep.tail = thm1_tail(t);
  finalize(rep);
  return rep;
}

// -------------------------------------------------------------- margins

/// sup{delta in (0,1): delta^{gamma/2} F(delta) <= n^{-1/2 + gamma/4}} where
/// F(delta) = sum of weights on states with f <= delta. Exact: F is a step
/// function, so each constant piece contributes min(right end, (thr/p)^{2/gamma}).
inline double gamma_margin(const Eigen::VectorXd& f, const Eigen::VectorXd& weights, double gamma, double n) {
  require(gamma > 0.0 && gamma <= 1.0, ErrorCode::InvalidInput, "gamma must lie in (0,1]", "gamma");
  require(n >= 2.0, ErrorCode::InvalidInput, "n must be at least 2", "n");
  require(f.size() == weights.size(), ErrorCode::DimensionMismatch, "values and weights differ in length", "weights");
  const double thr = std::pow(n, -0.5 + gamma / 4.0);
  std::vector<std::pair<double, double>> pts;
  for (Eigen::Index i = 0; i < f.size(); ++i) pts.emplace_back(f(i), weights(i));
  std::sort(pts.begin(), pts.end());
  // breakpoints inside (0,1)
  std::vector<double> cuts{0.0};
  for (const auto& [v, w] : pts)
    if (v > 0.0 && v < 1.0 && v != cuts.back()) cuts.push_back(v);
  cuts.push_back(1.0);
  double best = 0.0;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double lo = cuts[s], hi = cuts[s + 1];
    // value of F on (lo, hi) when s == 0, on [lo, hi) otherwise: mass at points <= lo,
    // plus points strictly inside, which do not exist by construction
    double p = 0.0;
    for (const auto& [v, w] : pts)
      if (v <= lo) p += w;
    double sup;
    if (p <= 0.0) sup = hi;
    else {
      const double c = std::pow(thr / p, 2.0 / gamma);
      if (c < lo || (s == 0 && c <= 0.0)) continue;
      sup = std::min(hi, c);
    }
    best = std::max(best, sup);
  }
  return best;
}

// ------------------------------------------------------------ step CDFs

/// Distribution with finitely many atoms; F(t) = mass of atoms <= t.
struct StepCdf {
  std::vector<double> atoms;   // strictly increasing
  std::vector<double> masses;

  static StepCdf from_weights(const Eigen::VectorXd& values, const Eigen::VectorXd& weights) {
    std::vector<std::pair<double, double>> pts;
    for (Eigen::Index i = 0; i < values.size(); ++i)
      if (weights(i) > 0.0) pts.emplace_back(values(i), weights(i));
    std::sort(pts.begin(), pts.end());
    StepCdf c;
    for (const auto& [v, w] : pts) {
      if (!c.atoms.empty() && c.atoms.back() == v) c.masses.back() += w;
      else {
        c.atoms.push_back(v);
        c.masses.push_back(w);
      }
    }
    return c;
  }

  double operator()(double t) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < atoms.size() && atoms[i] <= t; ++i) acc += masses[i];
    return acc;
  }

  /// F(t-), the mass strictly below t.
  double left(double t) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < atoms.size() && atoms[i] < t; ++i) acc += masses[i];
    return acc;
  }
};

inline void validate_cdf(const StepCdf& F, const std::string& field) {
  require(!F.atoms.empty() && F.atoms.size() == F.masses.size(), ErrorCode::InvalidCdf,
          "atoms and masses must be nonempty and of equal length", field);
  double s = 0.0;
  for (std::size_t i = 0; i < F.atoms.size(); ++i) {
    require(std::isfinite(F.atoms[i]), ErrorCode::InvalidCdf, "non-finite atom", field);
    require(std::isfinite(F.masses[i]) && F.masses[i] >= 0.0, ErrorCode::InvalidCdf, "negative mass", field);
    if (i > 0) require(F.atoms[i] > F.atoms[i - 1], ErrorCode::InvalidCdf, "atoms must be strictly increasing", field);
    s += F.masses[i];
  }
  require(std::abs(s - 1.0) <= 1e-12, ErrorCode::InvalidCdf, "masses sum to " + detail::fmt(s), field);
}

namespace detail {

/// sup_t F(t) - G(t + delta): F jumps up at its atoms and G(t + delta) jumps up at
/// y - delta, so the sup is reached at an atom of F or just left of some y - delta.
inline double levy_excess(const StepCdf& F, const StepCdf& G, double delta) {
  double worst = 0.0;
  for (double a : F.atoms) worst = std::max(worst, F(a) - G(a + delta));
  for (double y : G.atoms) worst = std::max(worst, F.left(y - delta) - G.left(y));
  return worst;
}

inline bool levy_feasible(const StepCdf& F, const StepCdf& G, double delta) {
  return levy_excess(F, G, delta) <= delta && levy_excess(G, F, delta) <= delta;
}

}  // namespace detail

/// Levy distance by bisection on delta in [0, 1], tolerance 1e-9.
inline double levy_distance(const StepCdf& F, const StepCdf& G) {
  validate_cdf(F, "F");
  validate_cdf(G, "G");
  if (detail::levy_feasible(F, G, 0.0)) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (detail::levy_feasible(F, G, mid) ? hi : lo) = mid;
  }
  return hi;
}

/// A closed-form bound with its additive terms and confidence level.
struct ScalarBound {
  std::string theorem;
  double value = 0.0;
  double clamped = 0.0;
  double tail = 0.0;
  double confidence = 0.0;
  std::vector<std::pair<std::string, double>> terms;
};

inline double scalar_total(const ScalarBound& b) {
  double acc = 0.0;
  for (const auto& [name, v] : b.terms) acc += v;
  return acc;
}

/// sup_f L(F_f, F_{n,f}) <= 4 sqrt(E||P_n^0||_F + M/sqrt(n)) + B_n + t sqrt(tau/n), w.p. 1 - 2e^{-2t^2}.
inline ScalarBound bound_levy(double E_P0, double M, double n, double t, const ChainAnalysis& a) {
  require(E_P0 >= 0.0 && M > 0.0 && n >= 1.0, ErrorCode::InvalidInput, "need E||P_n^0|| >= 0, M > 0, n >= 1", "inputs");
  require(t >= 0.0, ErrorCode::InvalidInput, "t must be >= 0", "t");
  ScalarBound b;
  b.theorem = "levy";
  b.terms = {{"complexity", 4.0 * std::sqrt(E_P0 + M / std::sqrt(n))},
             {"B_n", b_term(n, a.lambda(), a.chi_div())},
             {"tail", t * std::sqrt(a.tau() / n)}};
  b.value = scalar_total(b);
  b.clamped = std::min(b.value, 1.0);
  b.tail = 2.0 * std::exp(-2.0 * t * t);
  b.confidence = clamp01(1.0 - b.tail);
  return b;
}

/// sup_f sup_y |P_n(f<=y) - P(f<=y)| <= sqrt(B_n) + t sqrt(tau/n), w.p. 1 - 2e^{-2t^2}.
inline ScalarBound bound_sup_cdf(const ChainAnalysis& a, double n, double t) {
  require(n >= 1.0, ErrorCode::InvalidInput, "n must be at least 1", "n");
  require(t >= 0.0, ErrorCode::InvalidInput, "t must be >= 0", "t");
  ScalarBound b;
  b.theorem = "sup-cdf";
  b.terms = {{"sqrt_B_n", std::sqrt(b_term(n, a.lambda(), a.chi_div()))}, {"tail", t * std::sqrt(a.tau() / n)}};
  b.value = scalar_total(b);
  b.clamped = std::min(b.value, 1.0);
  b.tail = 2.0 * std::exp(-2.0 * t * t);
  b.confidence = clamp01(1.0 - b.tail);
  return b;
}

}  // namespace genbound

#endif  // GENBOUND_BOUNDS_HPP
