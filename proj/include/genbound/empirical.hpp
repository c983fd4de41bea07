#ifndef GENBOUND_EMPIRICAL_HPP
#define GENBOUND_EMPIRICAL_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "genbound/chain.hpp"
#include "genbound/error.hpp"
#include "genbound/random.hpp"

namespace genbound {

/// Finitely many functions tabulated on the states of a chain (one row per function).
/// For a labeled class the columns are (x, y) pairs in x-major order.
struct FunctionClass {
  Eigen::MatrixXd values;
  std::vector<std::string> names;
  double M = 0.0;
  bool labeled = false;
  std::size_t num_labels = 0;

  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t states() const { return static_cast<std::size_t>(values.cols()); }
};

inline FunctionClass make_class(Eigen::MatrixXd values, double M = -1.0) {
  FunctionClass c;
  c.M = M >= 0.0 ? M : (values.size() ? values.cwiseAbs().maxCoeff() : 0.0);
  for (Eigen::Index i = 0; i < values.rows(); ++i) c.names.push_back("f" + std::to_string(i));
  c.values = std::move(values);
  return c;
}

inline void validate_class(const FunctionClass& cls, std::size_t states) {
  require(cls.size() >= 1, ErrorCode::InvalidInput, "function class is empty", "functions");
  require(cls.states() == states, ErrorCode::DimensionMismatch,
          "functions have " + std::to_string(cls.states()) + " values, chain has " + std::to_string(states) + " states",
          "values");
  require(std::isfinite(cls.M) && cls.M >= 0.0, ErrorCode::InvalidInput, "M must be finite and >= 0", "M");
  for (Eigen::Index f = 0; f < cls.values.rows(); ++f)
    for (Eigen::Index x = 0; x < cls.values.cols(); ++x) {
      const double v = cls.values(f, x);
      require(std::isfinite(v), ErrorCode::InvalidInput, "non-finite value", "functions[" + std::to_string(f) + "]");
      require(std::abs(v) <= cls.M + 1e-12, ErrorCode::InvalidInput,
              "|value| " + detail::fmt(std::abs(v)) + " exceeds M=" + detail::fmt(cls.M),
              "functions[" + std::to_string(f) + "]");
    }
}

inline Eigen::VectorXd true_mean(const FunctionClass& cls, const StationaryResult& st) {
  require(static_cast<Eigen::Index>(cls.states()) == st.pi.size(), ErrorCode::DimensionMismatch,
          "class and stationary distribution disagree in size", "values");
  return cls.values * st.pi;
}

inline Eigen::VectorXd empirical_mean(const FunctionClass& cls, const Trajectory& traj) {
  require(cls.states() == traj.num_states, ErrorCode::DimensionMismatch,
          "class and trajectory disagree in state count", "values");
  return cls.values * occupation(traj) / static_cast<double>(traj.size());
}

/// ||P_n - P||_F.
inline double sup_deviation(const FunctionClass& cls, const Trajectory& traj, const StationaryResult& st) {
  return (empirical_mean(cls, traj) - true_mean(cls, st)).cwiseAbs().maxCoeff();
}

// ------------------------------------------------------------ complexity

enum class ComplexityKind { Rademacher, Gaussian };
enum class ComplexityMethod { MonteCarlo, ExactEnumeration };

inline std::string to_string(ComplexityKind k) { return k == ComplexityKind::Rademacher ? "rademacher" : "gaussian"; }
inline std::string to_string(ComplexityMethod m) {
  return m == ComplexityMethod::MonteCarlo ? "monte-carlo" : "exact-enumeration";
}

struct ComplexityEstimate {
  ComplexityKind kind = ComplexityKind::Rademacher;
  double value = 0.0;
  double stderr_ = 0.0;
  std::size_t replicas = 0;
  std::size_t n = 0;
  ComplexityMethod method = ComplexityMethod::MonteCarlo;
};

struct McOptions {
  std::size_t replicas = 10000;
  std::uint64_t seed = kDefaultSeed;
  unsigned workers = 1;
  bool stationary_start = false;
};

inline constexpr double kExactCap = 16777216.0;  // 2^24 weighted terms

inline Eigen::VectorXd start_distribution(const ChainSpec& spec, bool stationary_start) {
  return stationary_start ? stationary(spec).pi : spec.nu;
}

/// Calls visit(path, probability) for every length-n path of positive probability.
inline void enumerate_paths(const Eigen::MatrixXd& Q, const Eigen::VectorXd& start, std::size_t n,
                            const std::function<void(const std::vector<int>&, double)>& visit) {
  const int k = static_cast<int>(Q.rows());
  std::vector<int> path(n);
  std::function<void(std::size_t, double)> rec = [&](std::size_t i, double p) {
    if (i == n) {
      visit(path, p);
      return;
    }
    for (int x = 0; x < k; ++x) {
      const double q = i == 0 ? start(x) : Q(path[i - 1], x);
      if (q <= 0.0) continue;
      path[i] = x;
      rec(i + 1, p * q);
    }
  };
  if (n > 0) rec(0, 1.0);
}

/// E over all 2^n sign patterns of max_f |sum_i eps_i f(X_i)|, by Gray code.
inline double sign_average_sup(const Eigen::MatrixXd& values, const std::vector<int>& path) {
  const std::size_t n = path.size();
  const Eigen::Index F = values.rows();
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(F);
  for (int x : path) sums += values.col(x);
  std::vector<int> eps(n, 1);
  double total = sums.cwiseAbs().maxCoeff();
  const std::uint64_t patterns = std::uint64_t{1} << n;
  for (std::uint64_t g = 1; g < patterns; ++g) {
    const int j = std::countr_zero(g);
    sums -= (2.0 * eps[j]) * values.col(path[j]);
    eps[j] = -eps[j];
    total += sums.cwiseAbs().maxCoeff();
  }
  return total / static_cast<double>(patterns);
}

inline void require_enumerable(std::size_t states, std::size_t n, double extra_factor = 1.0) {
  const double terms = std::pow(static_cast<double>(states), static_cast<double>(n)) * std::ldexp(1.0, static_cast<int>(n)) * extra_factor;
  require(n <= 62 && terms <= kExactCap, ErrorCode::ExactTooLarge,
          "enumeration needs " + detail::fmt(terms) + " terms, above the 2^24 cap", "n");
}

/// R_n(F) = E || n^{-1} sum eps_i delta_{X_i} ||_F over the joint law of path and signs.
inline ComplexityEstimate rademacher_complexity(const FunctionClass& cls, const ChainSpec& spec, std::size_t n,
                                                const McOptions& opt = {}, bool exact = false) {
  require_valid(spec);
  validate_class(cls, spec.size());
  require(n >= 1, ErrorCode::InvalidInput, "n must be at least 1", "n");
  const Eigen::VectorXd start = start_distribution(spec, opt.stationary_start);
  ComplexityEstimate est;
  est.kind = ComplexityKind::Rademacher;
  est.n = n;
  const double dn = static_cast<double>(n);
  if (exact) {
    require_enumerable(spec.size(), n);
    double acc = 0.0;
    enumerate_paths(spec.Q, start, n, [&](const std::vector<int>& path, double p) {
      acc += p * sign_average_sup(cls.values, path);
    });
    est.value = acc / dn;
    est.method = ComplexityMethod::ExactEnumeration;
    return est;
  }
  require(opt.replicas >= 2, ErrorCode::InvalidInput, "need at least 2 replicas", "replicas");
  const ChainSampler sampler(spec.Q, start);
  const Eigen::Index k = spec.Q.rows();
  const auto draws = parallel_replicas(opt.replicas, opt.workers, [&](std::size_t r) {
    SplitMix64 rng = SplitMix64::stream(opt.seed, r);
    std::vector<int> path;
    sampler.fill(path, n, rng);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(k);
    for (std::size_t i = 0; i < n; ++i) s(path[i]) += rng.sign();
    return (cls.values * s).cwiseAbs().maxCoeff() / dn;
  });
  const auto m = mean_and_stderr(draws);
  est.value = m.mean;
  est.stderr_ = m.stderr_;
  est.replicas = opt.replicas;
  return est;
}

/// G_n(F) with standard normal multipliers; Monte Carlo only.
inline ComplexityEstimate gaussian_complexity(const FunctionClass& cls, const ChainSpec& spec, std::size_t n,
                                              const McOptions& opt = {}) {
  require_valid(spec);
  validate_class(cls, spec.size());
  require(n >= 1, ErrorCode::InvalidInput, "n must be at least 1", "n");
  require(opt.replicas >= 2, ErrorCode::InvalidInput, "need at least 2 replicas", "replicas");
  const Eigen::VectorXd start = start_distribution(spec, opt.stationary_start);
  const ChainSampler sampler(spec.Q, start);
  const Eigen::Index k = spec.Q.rows();
  const double dn = static_cast<double>(n);
  const auto draws = parallel_replicas(opt.replicas, opt.workers, [&](std::size_t r) {
    SplitMix64 rng = SplitMix64::stream(opt.seed, r);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<int> path;
    sampler.fill(path, n, rng);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(k);
    for (std::size_t i = 0; i < n; ++i) s(path[i]) += normal(rng);
    return (cls.values * s).cwiseAbs().maxCoeff() / dn;
  });
  ComplexityEstimate est;
  est.kind = ComplexityKind::Gaussian;
  est.n = n;
  const auto m = mean_and_stderr(draws);
  est.value = m.mean;
  est.stderr_ = m.stderr_;
  est.replicas = opt.replicas;
  return est;
}

/// Conditional complexity given one path: exact over signs up to n = 20, Monte Carlo beyond.
inline ComplexityEstimate empirical_rademacher(const FunctionClass& cls, const Trajectory& traj,
                                               const McOptions& opt = {}) {
  require(cls.states() == traj.num_states, ErrorCode::DimensionMismatch,
          "class and trajectory disagree in state count", "values");
  const std::size_t n = traj.size();
  const double dn = static_cast<double>(n);
  ComplexityEstimate est;
  est.n = n;
  if (n <= 20) {
    est.value = sign_average_sup(cls.values, traj.indices) / dn;
    est.method = ComplexityMethod::ExactEnumeration;
    return est;
  }
  const auto draws = parallel_replicas(opt.replicas, opt.workers, [&](std::size_t r) {
    SplitMix64 rng = SplitMix64::stream(opt.seed, r);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(traj.num_states));
    for (int x : traj.indices) s(x) += rng.sign();
    return (cls.values * s).cwiseAbs().maxCoeff() / dn;
  });
  const auto m = mean_and_stderr(draws);
  est.value = m.mean;
  est.stderr_ = m.stderr_;
  est.replicas = opt.replicas;
  return est;
}

// ----------------------------------------------------- class transforms

/// m_{f,y}(x) = f(x,y) - max_{y' != y} f(x,y'), over K labels.
inline FunctionClass multiclass_margin(const FunctionClass& cls, std::size_t K) {
  require(K >= 2, ErrorCode::InvalidInput, "multiclass margins need at least 2 labels", "labels");
  require(cls.states() % K == 0, ErrorCode::DimensionMismatch,
          "column count is not a multiple of the label count", "labels");
  const std::size_t S = cls.states() / K;
  FunctionClass out = cls;
  for (Eigen::Index f = 0; f < cls.values.rows(); ++f)
    for (std::size_t x = 0; x < S; ++x)
      for (std::size_t y = 0; y < K; ++y) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t y2 = 0; y2 < K; ++y2)
          if (y2 != y) best = std::max(best, cls.values(f, static_cast<Eigen::Index>(x * K + y2)));
        out.values(f, static_cast<Eigen::Index>(x * K + y)) = cls.values(f, static_cast<Eigen::Index>(x * K + y)) - best;
      }
  out.M = 2.0 * cls.M;
  out.labeled = true;
  out.num_labels = K;
  return out;
}

/// f~(x, y) = y f(x) on the (x, y) lift, for numeric labels such as {-1, +1}.
inline FunctionClass signed_margin(const FunctionClass& cls, const std::vector<double>& label_values) {
  require(!label_values.empty(), ErrorCode::InvalidInput, "no labels given", "labels");
  const std::size_t S = cls.states(), Y = label_values.size();
  double ymax = 0.0;
  for (double y : label_values) ymax = std::max(ymax, std::abs(y));
  FunctionClass out;
  out.values.resize(cls.values.rows(), static_cast<Eigen::Index>(S * Y));
  for (Eigen::Index f = 0; f < cls.values.rows(); ++f)
    for (std::size_t x = 0; x < S; ++x)
      for (std::size_t y = 0; y < Y; ++y)
        out.values(f, static_cast<Eigen::Index>(x * Y + y)) = label_values[y] * cls.values(f, static_cast<Eigen::Index>(x));
  out.names = cls.names;
  out.M = cls.M * ymax;
  out.labeled = true;
  out.num_labels = Y;
  return out;
}

/// f_M: clamp every value to [-M_cut, M_cut].
inline FunctionClass truncate_class(const FunctionClass& cls, double M_cut) {
  require(M_cut > 0.0, ErrorCode::InvalidInput, "truncation level must be positive", "M_cut");
  FunctionClass out = cls;
  out.values = cls.values.cwiseMax(-M_cut).cwiseMin(M_cut);
  out.M = std::min(cls.M, M_cut);
  return out;
}

// ------------------------------------------------------------- entropy

/// d_{P_n,2}(f, g) = (P_n |f - g|^2)^{1/2} with weights = occupation / n.
inline double pn_distance(const Eigen::VectorXd& f, const Eigen::VectorXd& g, const Eigen::VectorXd& weights) {
  double acc = 0.0;
  for (Eigen::Index x = 0; x < f.size(); ++x) {
    const double d = f(x) - g(x);
    acc += weights(x) * d * d;
  }
  return std::sqrt(acc);
}

struct CoverResult {
  std::size_t greedy = 0;
  std::size_t exact = 0;  // 0 when |F| > 12
  double entropy = 0.0;   // ln of the best count available
  std::vector<std::size_t> centers;
};

/// Covering number of the class in d_{P_n,2} at radius u, centers drawn from the class.
inline CoverResult covering_number(const FunctionClass& cls, const Trajectory& traj, double u) {
  require(u > 0.0, ErrorCode::InvalidInput, "radius must be positive", "u");
  require(cls.states() == traj.num_states, ErrorCode::DimensionMismatch,
          "class and trajectory disagree in state count", "values");
  const Eigen::VectorXd w = occupation(traj) / static_cast<double>(traj.size());
  const std::size_t F = cls.size();
  std::vector<std::vector<bool>> near(F, std::vector<bool>(F));
  for (std::size_t i = 0; i < F; ++i)
    for (std::size_t j = 0; j < F; ++j)
      near[i][j] = pn_distance(cls.values.row(static_cast<Eigen::Index>(i)).transpose(),
                               cls.values.row(static_cast<Eigen::Index>(j)).transpose(), w) <= u;
  CoverResult res;
  for (std::size_t i = 0; i < F; ++i) {
    bool covered = false;
    for (std::size_t c : res.centers) covered = covered || near[c][i];
    if (!covered) res.centers.push_back(i);
  }
  res.greedy = res.centers.size();
  std::size_t best = res.greedy;
  if (F <= 12) {
    const std::uint32_t full = (1u << F) - 1u;
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
      const std::size_t bits = static_cast<std::size_t>(std::popcount(mask));
      if (bits >= best) continue;
      bool ok = true;
      for (std::size_t i = 0; i < F && ok; ++i) {
        bool hit = false;
        for (std::size_t c = 0; c < F && !hit; ++c) hit = ((mask >> c) & 1u) && near[c][i];
        ok = hit;
      }
      if (ok) best = bits;
    }
    res.exact = best;
  }
  res.entropy = std::log(static_cast<double>(best));
  return res;
}

}  // namespace genbound

#endif  // GENBOUND_EMPIRICAL_HPP
