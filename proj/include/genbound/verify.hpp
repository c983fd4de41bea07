#ifndef GENBOUND_VERIFY_HPP
#define GENBOUND_VERIFY_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "genbound/analysis.hpp"
#include "genbound/bounds.hpp"
#include "genbound/chain.hpp"
#include "genbound/empirical.hpp"
#include "genbound/error.hpp"
#include "genbound/random.hpp"

namespace genbound {

inline constexpr std::size_t kMinReplicas = 100;
inline constexpr double kIdentityTol = 1e-12;

/// How `pass` follows from the stored fields.
///   ThreeSigma: slack > -3 * stderr
///   Wilson:     lower <= rhs (z = 3 Wilson lower end of the empirical frequency)
///   Exact:      |lhs - rhs| <= tolerance
enum class PassRule { ThreeSigma, Wilson, Exact };

inline std::string to_string(PassRule r) {
  switch (r) {
    case PassRule::ThreeSigma: return "slack>-3se";
    case PassRule::Wilson: return "wilson-lower<=rhs";
    case PassRule::Exact: return "exact";
  }
  return "exact";
}

struct Check {
  std::string name;
  double lhs = 0.0;
  double stderr_ = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs
  double lower = 0.0;  // Wilson lower end (Wilson rule only)
  double tolerance = 0.0;
  PassRule rule = PassRule::ThreeSigma;
  bool vacuous = false;
  bool pass = false;
};

inline bool check_passes(const Check& c) {
  switch (c.rule) {
    case PassRule::ThreeSigma: return c.slack > -3.0 * c.stderr_;
    case PassRule::Wilson: return c.lower <= c.rhs;
    case PassRule::Exact: return std::abs(c.lhs - c.rhs) <= c.tolerance;
  }
  return false;
}

inline std::string status(const Check& c) { return !c.pass ? "fail" : (c.vacuous ? "vacuous" : "pass"); }

struct VerifyReport {
  std::string target;
  std::size_t replicas = 0;
  std::uint64_t seed = 0;
  std::vector<Check> checks;
  bool pass = false;
  std::vector<std::pair<std::string, double>> diagnostics;
  std::vector<std::string> notes;

  double diagnostic(const std::string& key) const {
    for (const auto& [k, v] : diagnostics)
      if (k == key) return v;
    throw Error(ErrorCode::InvalidInput, "no diagnostic named " + key, key);
  }
};

inline void seal(VerifyReport& rep) {
  rep.pass = true;
  for (auto& c : rep.checks) {
    c.pass = check_passes(c);
    rep.pass = rep.pass && c.pass;
  }
}

struct VerifyOptions {
  std::size_t replicas = 10000;
  std::uint64_t seed = kDefaultSeed;
  unsigned workers = 1;
  bool stationary_start = false;  // start from pi instead of nu
  GuardMode guard = GuardMode::Guarded;
};

namespace detail {

inline void require_replicas(const VerifyOptions& opt) {
  require(opt.replicas >= kMinReplicas, ErrorCode::InvalidInput,
          "need at least " + std::to_string(kMinReplicas) + " replicas", "replicas");
}

inline Check three_sigma(std::string name, const std::vector<double>& per_replica, double rhs) {
  const auto m = mean_and_stderr(per_replica);
  Check c;
  c.name = std::move(name);
  c.lhs = m.mean;
  c.stderr_ = m.stderr_;
  c.rhs = rhs;
  c.slack = rhs - m.mean;
  c.rule = PassRule::ThreeSigma;
  return c;
}

inline AnalysisOptions guard_options(GuardMode g) {
  AnalysisOptions o;
  o.guard = g;
  return o;
}

inline double guarded_tau(const ChainAnalysis& a, GuardMode g) {
  return g == GuardMode::Guarded ? a.tau_min_guarded : a.tau_min_literal;
}

}  // namespace detail

/// Wilson score interval lower end for k successes out of R.
inline double wilson_lower(std::size_t k, std::size_t R, double z = 3.0) {
  const double r = static_cast<double>(R), p = static_cast<double>(k) / r, z2 = z * z;
  const double centre = p + z2 / (2.0 * r);
  const double half = z * std::sqrt(p * (1.0 - p) / r + z2 / (4.0 * r * r));
  return std::max(0.0, (centre - half) / (1.0 + z2 / r));
}

// ------------------------------------------------------ symmetrization

/// E||P_n - P||_F <= 2 E||P_n^0||_F + A_n and (1/2) E||P_n^0||_F - A~_n <= E||P_n - P||_F.
/// Both sides come from the same replicas, so each check is a paired difference.
inline VerifyReport verify_symmetrization(const ChainSpec& spec, const FunctionClass& cls, std::size_t n,
                                          const VerifyOptions& opt = {}) {
  require_valid(spec);
  validate_class(cls, spec.size());
  require(n >= 1, ErrorCode::InvalidInput, "n must be at least 1", "n");
  detail::require_replicas(opt);
  const auto a = analyze_chain(spec, detail::guard_options(opt.guard));
  const Eigen::VectorXd start = start_distribution(spec, opt.stationary_start);
  const double chi = opt.stationary_start ? 0.0 : a.chi_div();
  const double dn = static_cast<double>(n);
  const auto terms = symmetrization_terms(cls.M, dn, a.lambda(), chi, detail::guarded_tau(a, opt.guard));
  const Eigen::VectorXd Pf = true_mean(cls, a.stationary);
  const ChainSampler sampler(spec.Q, start);
  const Eigen::Index k = spec.Q.rows();

  const auto draws = parallel_replicas(opt.replicas, opt.workers, [&](std::size_t r) {
    SplitMix64 rng = SplitMix64::stream(opt.seed, r);
    std::vector<int> path;
    sampler.fill(path, n, rng);
    Eigen::VectorXd occ = Eigen::VectorXd::Zero(k), s = Eigen::VectorXd::Zero(k);
    for (int x : path) {
      occ(x) += 1.0;
      s(x) += rng.sign();
    }
    const double dev = (cls.values * occ / dn - Pf).cwiseAbs().maxCoeff();
    const double sym = (cls.values * s).cwiseAbs().maxCoeff() / dn;
    return std::pair<double, double>(dev, sym);
  });

  std::vector<double> dev(draws.size()), sym(draws.size()), upper(draws.size()), lower(draws.size());
  for (std::size_t r = 0; r < draws.size(); ++r) {
    dev[r] = draws[r].first;
    sym[r] = draws[r].second;
    upper[r] = dev[r] - 2.0 * sym[r];
    lower[r] = 0.5 * sym[r] - dev[r];
  }
  VerifyReport rep;
  rep.target = "symmetrization";
  rep.replicas = opt.replicas;
  rep.seed = opt.seed;
  rep.checks.push_back(detail::three_sigma("upper: E||Pn-P|| - 2E||Pn0|| <= A_n", upper, terms.A_n));
  auto lo = detail::three_sigma("lower: E||Pn0||/2 - E||Pn-P|| <= A~_n", lower, terms.A_tilde_n);
  const auto msym = mean_and_stderr(sym), mdev = mean_and_stderr(dev);
  lo.vacuous = 0.5 * msym.mean - terms.A_tilde_n <= 0.0;  // lower bound on E||Pn-P|| is not positive
  rep.checks.push_back(lo);
  rep.diagnostics = {{"E_dev", mdev.mean},     {"E_dev_stderr", mdev.stderr_}, {"E_sym", msym.mean},
                     {"E_sym_stderr", msym.stderr_}, {"A_n", terms.A_n},         {"A_tilde_n", terms.A_tilde_n},
                     {"lambda", a.lambda()}, {"chi_div", chi},               {"tau_min", terms.tau_min},
                     {"M", cls.M},           {"n", dn}};
  rep.notes.push_back(opt.stationary_start ? "trajectories start from pi" : "trajectories start from nu");
  seal(rep);
  return rep;
}

// ------------------------------------------------------------ variance

/// E|S_{n,n0}(f) - E_pi f|^2 <= 2M/(n(1-lambda)) + 64 M^2/(n^2(1-lambda)^2) lambda^{n0} chi,
/// with S_{n,n0} = (1/n) sum_{j=1}^n f(X_{j+n0}) and X_1 ~ nu.
inline VerifyReport verify_variance(const ChainSpec& spec, const Eigen::VectorXd& f, std::size_t n, std::size_t n0,
                                    const VerifyOptions& opt = {}, std::optional<double> M_opt = std::nullopt) {
  require_valid(spec);
  require(static_cast<std::size_t>(f.size()) == spec.size(), ErrorCode::DimensionMismatch,
          "f needs one value per state", "f");
  require(n >= 1, ErrorCode::InvalidInput, "n must be at least 1", "n");
  detail::require_replicas(opt);
  const double fmax = f.cwiseAbs().maxCoeff();
  const double M = M_opt.value_or(fmax);
  require(M >= fmax, ErrorCode::InvalidInput, "M is below max |f|", "M");
  const auto a = analyze_chain(spec, detail::guard_options(opt.guard));
  const Eigen::VectorXd start = start_distribution(spec, opt.stationary_start);
  const double chi = opt.stationary_start ? 0.0 : a.chi_div();
  const double lam = a.lambda(), dn = static_cast<double>(n);
  const double Pf = a.stationary.pi.dot(f);
  double rhs = kInf;
  if (lam < 1.0) {
    const double g = 1.0 - lam;
    rhs = 2.0 * M / (dn * g) + 64.0 * M * M / (dn * dn * g * g) * std::pow(lam, static_cast<double>(n0)) * chi;
  }
  const ChainSampler sampler(spec.Q, start);
  const auto draws = parallel_replicas(opt.replicas, opt.workers, [&](std::size_t r) {
    SplitMix64 rng = SplitMix64::stream(opt.seed, r);
    std::vector<int> path;
    sampler.fill(path, n0 + n, rng);
    double s = 0.0;
    for (std::size_t j = n0; j < n0 + n; ++j) s += f(path[j]);
    const double d = s / dn - Pf;
    return d * d;
  });
  VerifyReport rep;
  rep.target = "variance";
  rep.replicas = opt.replicas;
  rep.seed = opt.seed;
  auto c = detail::three_sigma("E|S_{n,n0} - Pf|^2 <= rhs", draws, rhs);
  c.vacuous = !std::isfinite(rhs);
  rep.checks.push_back(c);
  rep.diagnostics = {{"lambda", lam}, {"chi_div", chi}, {"M", M}, {"n", dn}, {"n0", static_cast<double>(n0)},
                     {"E_pi_f", Pf}};
  seal(rep);
  return rep;
}

// ----------------------------------------------------------- McDiarmid

/// A function of the whole path plus its exact expectation.
struct PathStatistic {
  std::function<double(const std::vector<int>&)> eval;
  double mean = 0.0;
};

/// (1/n) sum v(X_i) with its exact mean sum_i nu Q^{i-1} v / n.
inline PathStatistic mean_statistic(const ChainSpec& spec, const Eigen::VectorXd& v, std::size_t n,
                                    bool stationary_start = false) {
  require(static_cast<std::size_t>(v.size()) == spec.size(), ErrorCode::DimensionMismatch,
          "values need one entry per state", "values");
  Eigen::RowVectorXd law = start_distribution(spec, stationary_start).transpose();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += law.dot(v);
    law = (law * spec.Q).eval();
  }
  const double dn = static_cast<double>(n);
  return {[v, dn](const std::vector<int>& path) {
            double s = 0.0;
            for (int x : path) s += v(x);
            return s / dn;
          },
          acc / dn};
}

/// Coefficients c_i = (max v - min v)/n of the path mean.
inline std::vector<double> mean_coefficients(const Eigen::VectorXd& v, std::size_t n) {
  return std::vector<double>(n, (v.maxCoeff() - v.minCoeff()) / static_cast<double>(n));
}

/// P(|g - Eg| >= t) <= 2 exp(-2t^2/(||c||^2 tau_min)) at every t in the grid.
inline VerifyReport verify_mcdiarmid(const ChainSpec& spec, const std::vector<double>& c, const PathStatistic& stat,
                                     const std::vector<double>& t_grid, const VerifyOptions& opt = {},
                                     std::size_t spot_checks = 1000) {
  require_valid(spec);
  detail::require_replicas(opt);
  require(!c.empty(), ErrorCode::InvalidInput, "need one coefficient per coordinate", "c");
  require(!t_grid.empty(), ErrorCode::InvalidInput, "t grid is empty", "t_grid");
  for (double t : t_grid) require(t > 0.0 && std::isfinite(t), ErrorCode::InvalidInput, "t must be positive", "t_grid");
  const std::size_t n = c.size();
  const auto a = analyze_chain(spec, detail::guard_options(opt.guard));
  const double tau = detail::guarded_tau(a, opt.guard);
  const Eigen::VectorXd start = start_distribution(spec, opt.stationary_start);
  const ChainSampler sampler(spec.Q, start);
  double c2 = 0.0;
  for (double ci : c) c2 += ci * ci;

  // spot-check the declared coefficients on random single-coordinate changes
  const std::uint64_t spot_seed = mix64(opt.seed ^ 0x9E3779B97F4A7C15ull);
  for (std::size_t k = 0; k < spot_checks && spec.size() > 1; ++k) {
    SplitMix64 rng = SplitMix64::stream(spot_seed, k);
    std::vector<int> path;
    sampler.fill(path, n, rng);
    const std::size_t i = static_cast<std::size_t>(rng() % n);
    auto other = path;
    other[i] = static_cast<int>((static_cast<std::size_t>(path[i]) + 1 + rng() % (spec.size() - 1)) % spec.size());
    const double diff = std::abs(stat.eval(path) - stat.eval(other));
    require(diff <= c[i] + 1e-12, ErrorCode::CoefficientCheckFailed,
            "changing coordinate " + std::to_string(i) + " moves the statistic by " + detail::fmt(diff) +
                " > c_i = " + detail::fmt(c[i]),
            "c");
  }

  const auto values = parallel_replicas(opt.replicas, opt.workers, [&](std::size_t r) {
    SplitMix64 rng = SplitMix64::stream(opt.seed, r);
    std::vector<int> path;
    sampler.fill(path, n, rng);
    return stat.eval(path);
  });

  VerifyReport rep;
  rep.target = "mcdiarmid";
  rep.replicas = opt.replicas;
  rep.seed = opt.seed;
  for (double t : t_grid) {
    std::size_t hits = 0;
    for (double v : values)
      if (std::abs(v - stat.mean) >= t) ++hits;
    Check ch;
    ch.name = "t=" + detail::fmt(t);
    ch.lhs = static_cast<double>(hits) / static_cast<double>(opt.replicas);
    ch.stderr_ = std::sqrt(ch.lhs * (1.0 - ch.lhs) / static_cast<double>(opt.replicas));
    ch.rhs = tau > 0.0 ? 2.0 * std::exp(-2.0 * t * t / (c2 * tau)) : 0.0;
    ch.slack = ch.rhs - ch.lhs;
    ch.lower = wilson_lower(hits, opt.replicas);
    ch.rule = PassRule::Wilson;
    ch.vacuous = ch.rhs >= 1.0;
    rep.checks.push_back(ch);
  }
  if (tau == 0.0)
    rep.notes.push_back("tau_min = 0 (literal mode): the bound is 0 for every t > 0, so any deviation fails");
  rep.diagnostics = {{"tau_min", tau}, {"c_norm_sq", c2}, {"E_stat", stat.mean}, {"n", static_cast<double>(n)}};
  seal(rep);
  return rep;
}

// --------------------------------------------------------- theorem tails

enum class TailTarget { Thm1Rademacher, Thm1Gaussian, TwoSided, DkwLemma, LevyLemma };

inline std::string to_string(TailTarget t) {
  switch (t) {
    case TailTarget::Thm1Rademacher: return "thm1-rademacher";
    case TailTarget::Thm1Gaussian: return "thm1-gaussian";
    case TailTarget::TwoSided: return "two-sided";
    case TailTarget::DkwLemma: return "dkw-lemma";
    case TailTarget::LevyLemma: return "levy-lemma";
  }
  return "thm1-rademacher";
}

struct TailOptions {
  MarginLoss phi = MarginLoss::ramp_upper();
  std::vector<double> grid = dyadic_grid();
  std::optional<ComplexityEstimate> complexity;  // computed when absent
  std::size_t complexity_replicas = 20000;
};

/// Complexity for the tail experiments: exact enumeration when it fits, Monte Carlo otherwise.
inline ComplexityEstimate tail_complexity(TailTarget target, const FunctionClass& cls, const ChainSpec& spec,
                                          std::size_t n, const VerifyOptions& opt, std::size_t replicas) {
  McOptions mc;
  mc.replicas = replicas;
  mc.seed = mix64(opt.seed + 0x5851F42D4C957F2Dull);
  mc.workers = opt.workers;
  mc.stationary_start = opt.stationary_start;
  if (target == TailTarget::Thm1Gaussian) return gaussian_complexity(cls, spec, n, mc);
  const bool exact = n <= 62 && std::pow(2.0 * static_cast<double>(spec.size()), static_cast<double>(n)) <= kExactCap;
  return rademacher_complexity(cls, spec, n, mc, exact);
}

/// Frequency of the violation event over replicas against the theorem's tail.
inline VerifyReport verify_theorem_tail(TailTarget target, const ChainSpec& spec, const FunctionClass& cls,
                                        std::size_t n, double t, const VerifyOptions& opt = {},
                                        const TailOptions& topt = {}) {
  require_valid(spec);
  validate_class(cls, spec.size());
  detail::require_replicas(opt);
  require(n >= 1, ErrorCode::InvalidInput, "n must be at least 1", "n");
  require(t > 0.0 && std::isfinite(t), ErrorCode::InvalidInput, "t must be positive", "t");
  auto a = analyze_chain(spec, detail::guard_options(opt.guard));
  if (opt.stationary_start) {
    a.spectral.chi_div = 0.0;
    a.chi_div_pi_weighted = 0.0;
    a.chi_div_unweighted = 0.0;
  }
  const ComplexityEstimate cx =
      topt.complexity ? *topt.complexity : tail_complexity(target, cls, spec, n, opt, topt.complexity_replicas);
  const Eigen::VectorXd start = start_distribution(spec, opt.stationary_start);
  const ChainSampler sampler(spec.Q, start);
  const Eigen::VectorXd& pi = a.stationary.pi;
  const double dn = static_cast<double>(n);
  const Eigen::Index F = cls.values.rows(), S = cls.values.cols();

  // P{f <= 0} and the law of f under pi
  std::vector<double> p_neg(static_cast<std::size_t>(F), 0.0);
  std::vector<StepCdf> laws;
  for (Eigen::Index f = 0; f < F; ++f) {
    for (Eigen::Index x = 0; x < S; ++x)
      if (cls.values(f, x) <= 0.0) p_neg[static_cast<std::size_t>(f)] += pi(x);
    laws.push_back(StepCdf::from_weights(cls.values.row(f).transpose(), pi));
  }

  double tail = 0.0, fixed_bound = 0.0;
  switch (target) {
    case TailTarget::Thm1Rademacher:
    case TailTarget::Thm1Gaussian: tail = thm1_tail(t); break;
    case TailTarget::TwoSided: tail = two_sided_tail(t); break;
    case TailTarget::DkwLemma: {
      const auto b = bound_sup_cdf(a, dn, t);
      tail = b.tail;
      fixed_bound = b.value;
      break;
    }
    case TailTarget::LevyLemma: {
      const auto b = bound_levy(cx.value, cls.M, dn, t, a);
      tail = b.tail;
      fixed_bound = b.value;
      break;
    }
  }

  // per replica: (violation, reported bound)
  const auto draws = parallel_replicas(opt.replicas, opt.workers, [&](std::size_t r) {
    SplitMix64 rng = SplitMix64::stream(opt.seed, r);
    Trajectory traj{spec.size(), {}, opt.seed};
    sampler.fill(traj.indices, n, rng);
    const Eigen::VectorXd w = occupation(traj) / dn;
    bool violated = false;
    double reported = fixed_bound;
    switch (target) {
      case TailTarget::Thm1Rademacher:
      case TailTarget::Thm1Gaussian: {
        const auto kind =
            target == TailTarget::Thm1Rademacher ? ComplexityKind::Rademacher : ComplexityKind::Gaussian;
        const auto rep = bound_thm1(cls, a, traj, topt.phi, t, topt.grid, kind, cx);
        for (Eigen::Index f = 0; f < F; ++f)
          violated = violated || p_neg[static_cast<std::size_t>(f)] > rep.functions[static_cast<std::size_t>(f)].bound;
        reported = rep.bound;
        break;
      }
      case TailTarget::TwoSided: {
        const auto rep = bound_two_sided(cls, a, traj, t, topt.grid, cx);
        for (Eigen::Index f = 0; f < F; ++f) {
          double pn = 0.0;
          for (Eigen::Index x = 0; x < S; ++x)
            if (cls.values(f, x) <= 0.0) pn += w(x);
          violated = violated ||
                     std::abs(pn - p_neg[static_cast<std::size_t>(f)]) > rep.functions[static_cast<std::size_t>(f)].bound;
        }
        reported = rep.bound;
        break;
      }
      case TailTarget::DkwLemma: {
        double sup = 0.0;
        for (Eigen::Index f = 0; f < F; ++f) {
          const auto emp = StepCdf::from_weights(cls.values.row(f).transpose(), w);
          for (Eigen::Index x = 0; x < S; ++x) {
            const double y = cls.values(f, x);
            sup = std::max(sup, std::abs(emp(y) - laws[static_cast<std::size_t>(f)](y)));
          }
        }
        violated = sup > fixed_bound;
        break;
      }
      case TailTarget::LevyLemma: {
        double sup = 0.0;
        for (Eigen::Index f = 0; f < F; ++f) {
          const auto emp = StepCdf::from_weights(cls.values.row(f).transpose(), w);
          sup = std::max(sup, levy_distance(laws[static_cast<std::size_t>(f)], emp));
        }
        violated = sup > fixed_bound;
        break;
      }
    }
    return std::pair<double, double>(violated ? 1.0 : 0.0, reported);
  });

  std::size_t hits = 0, vacuous_bounds = 0;
  for (const auto& [v, b] : draws) {
    if (v > 0.0) ++hits;
    if (b >= 1.0) ++vacuous_bounds;
  }
  const double R = static_cast<double>(opt.replicas);
  const double tail_c = std::min(tail, 1.0);
  VerifyReport rep;
  rep.target = to_string(target);
  rep.replicas = opt.replicas;
  rep.seed = opt.seed;
  Check ch;
  ch.name = "violation frequency <= tail";
  ch.lhs = static_cast<double>(hits) / R;
  ch.rhs = tail_c;
  ch.stderr_ = std::sqrt(tail_c * (1.0 - tail_c) / R);
  ch.slack = ch.rhs - ch.lhs;
  ch.rule = PassRule::ThreeSigma;
  ch.vacuous = tail >= 1.0;
  rep.checks.push_back(ch);
  rep.diagnostics = {{"tail", tail},
                     {"t", t},
                     {"n", dn},
                     {"violations", static_cast<double>(hits)},
                     {"complexity", cx.value},
                     {"complexity_stderr", cx.stderr_},
                     {"bound_at_least_one_fraction", static_cast<double>(vacuous_bounds) / R},
                     {"lambda", a.lambda()},
                     {"tau_min", a.tau()},
                     {"B_n", b_term(dn, a.lambda(), a.chi_div())}};
  if (vacuous_bounds == opt.replicas)
    rep.notes.push_back("the bound is at least 1 on every replica, so no violation is possible");
  seal(rep);
  return rep;
}

// ------------------------------------------------------ replica identity

namespace detail {

/// Average over all 2^n sign patterns of max_f |sum_i eps_i D(f, i)|.
inline double sign_average_columns(const Eigen::MatrixXd& D) {
  const auto n = static_cast<std::size_t>(D.cols());
  Eigen::VectorXd sums = D.rowwise().sum();
  std::vector<int> eps(n, 1);
  double total = sums.cwiseAbs().maxCoeff();
  const std::uint64_t patterns = std::uint64_t{1} << n;
  for (std::uint64_t g = 1; g < patterns; ++g) {
    const int j = std::countr_zero(g);
    sums -= (2.0 * eps[static_cast<std::size_t>(j)]) * D.col(j);
    eps[static_cast<std::size_t>(j)] = -eps[static_cast<std::size_t>(j)];
    total += sums.cwiseAbs().maxCoeff();
  }
  return total / static_cast<double>(patterns);
}

}  // namespace detail

/// Exact enumeration of both sides of
/// E_eps E_{X,Y} sup_f |sum eps_i (f(X_i) - f(Y_i))| = E_{X,Y} sup_f |sum (f(X_i) - f(Y_i))|
/// with X, Y independent copies of the chain.
inline VerifyReport verify_replica_identity(const ChainSpec& spec, const FunctionClass& cls, std::size_t n,
                                            const VerifyOptions& opt = {}) {
  require_valid(spec);
  validate_class(cls, spec.size());
  require(n >= 1, ErrorCode::InvalidInput, "n must be at least 1", "n");
  require_enumerable(spec.size() * spec.size(), n, static_cast<double>(cls.size()));
  const Eigen::VectorXd start = start_distribution(spec, opt.stationary_start);
  std::vector<std::vector<int>> paths;
  std::vector<double> probs;
  enumerate_paths(spec.Q, start, n, [&](const std::vector<int>& p, double w) {
    paths.push_back(p);
    probs.push_back(w);
  });
  const Eigen::Index F = cls.values.rows();
  double lhs = 0.0, rhs = 0.0;
  Eigen::MatrixXd D(F, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < paths.size(); ++i)
    for (std::size_t j = 0; j < paths.size(); ++j) {
      for (std::size_t k = 0; k < n; ++k)
        D.col(static_cast<Eigen::Index>(k)) = cls.values.col(paths[i][k]) - cls.values.col(paths[j][k]);
      const double p = probs[i] * probs[j];
      lhs += p * detail::sign_average_columns(D);
      rhs += p * D.rowwise().sum().cwiseAbs().maxCoeff();
    }
  VerifyReport rep;
  rep.target = "replica-identity";
  rep.replicas = 0;
  rep.seed = opt.seed;
  Check ch;
  ch.name = "E_eps E sup|sum eps (f(X)-f(Y))| == E sup|sum (f(X)-f(Y))|";
  ch.lhs = lhs;
  ch.rhs = rhs;
  ch.slack = rhs - lhs;
  ch.tolerance = kIdentityTol;
  ch.rule = PassRule::Exact;
  rep.checks.push_back(ch);
  rep.diagnostics = {{"lhs", lhs}, {"rhs", rhs}, {"deviation", std::abs(lhs - rhs)},
                     {"paths", static_cast<double>(paths.size())}, {"n", static_cast<double>(n)}};
  seal(rep);
  return rep;
}

}  // namespace genbound

#endif  // GENBOUND_VERIFY_HPP
