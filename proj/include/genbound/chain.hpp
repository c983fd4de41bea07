#ifndef GENBOUND_CHAIN_HPP
#define GENBOUND_CHAIN_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "genbound/error.hpp"
#include "genbound/random.hpp"

namespace genbound {

inline constexpr double kStochasticTol = 1e-12;
inline constexpr double kEdgeTol = 1e-15;

struct ChainSpec {
  std::vector<std::string> states;
  Eigen::MatrixXd Q;
  Eigen::VectorXd nu;

  std::size_t size() const { return static_cast<std::size_t>(Q.rows()); }
};

inline std::vector<std::string> default_state_names(std::size_t n) {
  std::vector<std::string> names(n);
  for (std::size_t i = 0; i < n; ++i) names[i] = std::to_string(i);
  return names;
}

inline ChainSpec make_chain(Eigen::MatrixXd Q, Eigen::VectorXd nu) {
  ChainSpec spec;
  spec.states = default_state_names(static_cast<std::size_t>(Q.rows()));
  spec.Q = std::move(Q);
  spec.nu = std::move(nu);
  return spec;
}

/// Chain whose every row equals p, started from p.
inline ChainSpec iid_chain(const Eigen::VectorXd& p) {
  const Eigen::Index k = p.size();
  Eigen::MatrixXd Q(k, k);
  for (Eigen::Index r = 0; r < k; ++r) Q.row(r) = p.transpose();
  return make_chain(Q, p);
}

/// Two-state chain flipping with probability p from state 0 and q from state 1.
inline ChainSpec two_state_chain(double p, double q, Eigen::VectorXd nu = Eigen::VectorXd()) {
  Eigen::MatrixXd Q(2, 2);
  Q << 1.0 - p, p, q, 1.0 - q;
  if (nu.size() == 0) {
    nu = Eigen::VectorXd(2);
    nu << q / (p + q), p / (p + q);
  }
  return make_chain(Q, nu);
}

namespace detail {
inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}
}  // namespace detail

/// Every broken invariant, each with its location. Empty means valid.
inline std::vector<std::string> validate_chain(const ChainSpec& spec) {
  std::vector<std::string> out;
  const Eigen::Index k = spec.Q.rows();
  if (k < 1) {
    out.push_back("chain has no states");
    return out;
  }
  if (spec.Q.cols() != k) out.push_back("Q is " + std::to_string(k) + "x" + std::to_string(spec.Q.cols()) + ", not square");
  if (spec.nu.size() != k) out.push_back("nu has length " + std::to_string(spec.nu.size()) + ", expected " + std::to_string(k));
  if (!spec.states.empty() && static_cast<Eigen::Index>(spec.states.size()) != k)
    out.push_back("states has " + std::to_string(spec.states.size()) + " entries, expected " + std::to_string(k));
  if (!out.empty()) return out;

  for (Eigen::Index r = 0; r < k; ++r) {
    double sum = 0.0;
    for (Eigen::Index c = 0; c < k; ++c) {
      const double v = spec.Q(r, c);
      if (!std::isfinite(v)) out.push_back("Q[" + std::to_string(r) + "][" + std::to_string(c) + "] is not finite");
      else if (v < 0.0) out.push_back("Q[" + std::to_string(r) + "][" + std::to_string(c) + "] is negative (" + detail::fmt(v) + ")");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kStochasticTol) out.push_back("row " + std::to_string(r) + " sums to " + detail::fmt(sum));
  }
  double nsum = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double v = spec.nu(i);
    if (!std::isfinite(v)) out.push_back("nu[" + std::to_string(i) + "] is not finite");
    else if (v < 0.0) out.push_back("nu[" + std::to_string(i) + "] is negative (" + detail::fmt(v) + ")");
    nsum += v;
  }
  if (std::abs(nsum - 1.0) > kStochasticTol) out.push_back("nu sums to " + detail::fmt(nsum));
  return out;
}

inline void require_valid(const ChainSpec& spec, const std::string& field = "chain") {
  const auto issues = validate_chain(spec);
  if (!issues.empty()) throw Error(ErrorCode::InvalidInput, issues.front(), field);
}

/// Probability vector check shared by emissions, priors and mixture weights.
inline void require_distribution(const Eigen::VectorXd& p, const std::string& field) {
  require(p.size() >= 1, ErrorCode::InvalidInput, field + " is empty", field);
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    require(std::isfinite(p(i)) && p(i) >= 0.0, ErrorCode::InvalidInput,
            field + "[" + std::to_string(i) + "] is not a probability", field);
    s += p(i);
  }
  require(std::abs(s - 1.0) <= kStochasticTol, ErrorCode::InvalidInput, field + " sums to " + detail::fmt(s), field);
}

// ---------------------------------------------------------------- graph

/// Strongly connected components of the digraph x -> y with Q(x,y) > 1e-15.
/// Iterative Tarjan; component ids are assigned in completion order.
inline std::vector<int> strong_components(const Eigen::MatrixXd& Q, int* count = nullptr) {
  const int k = static_cast<int>(Q.rows());
  std::vector<int> index(k, -1), low(k, 0), comp(k, -1);
  std::vector<bool> on_stack(k, false);
  std::vector<int> stack;
  int next_index = 0, ncomp = 0;
  struct Frame { int v; int next; };
  for (int root = 0; root < k; ++root) {
    if (index[root] >= 0) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.next < k) {
        const int w = f.next++;
        if (Q(f.v, w) <= kEdgeTol) continue;
        if (index[w] < 0) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      const int v = f.v;
      if (low[v] == index[v]) {
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = ncomp;
        } while (w != v);
        ++ncomp;
      }
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
    }
  }
  if (count) *count = ncomp;
  return comp;
}

/// Component ids that no edge leaves.
inline std::vector<int> closed_classes(const Eigen::MatrixXd& Q) {
  int ncomp = 0;
  const auto comp = strong_components(Q, &ncomp);
  std::vector<bool> closed(ncomp, true);
  for (Eigen::Index x = 0; x < Q.rows(); ++x)
    for (Eigen::Index y = 0; y < Q.cols(); ++y)
      if (Q(x, y) > kEdgeTol && comp[x] != comp[y]) closed[comp[x]] = false;
  std::vector<int> out;
  for (int c = 0; c < ncomp; ++c)
    if (closed[c]) out.push_back(c);
  return out;
}

/// Period of an irreducible chain (gcd of cycle lengths); 0 when reducible.
inline int chain_period(const Eigen::MatrixXd& Q) {
  int ncomp = 0;
  strong_components(Q, &ncomp);
  if (ncomp != 1) return 0;
  const int k = static_cast<int>(Q.rows());
  std::vector<int> level(k, -1);
  std::vector<int> queue{0};
  level[0] = 0;
  for (std::size_t h = 0; h < queue.size(); ++h) {
    const int v = queue[h];
    for (int w = 0; w < k; ++w)
      if (Q(v, w) > kEdgeTol && level[w] < 0) {
        level[w] = level[v] + 1;
        queue.push_back(w);
      }
  }
  int g = 0;
  for (int v = 0; v < k; ++v)
    for (int w = 0; w < k; ++w)
      if (Q(v, w) > kEdgeTol) g = std::gcd(g, std::abs(level[v] + 1 - level[w]));
  return g;
}

// ----------------------------------------------------------- stationary

struct StationaryResult {
  Eigen::VectorXd pi;
  double pi_star = 0.0;
  bool irreducible = false;
  bool reversible = false;
};

inline bool is_reversible(const Eigen::MatrixXd& Q, const Eigen::VectorXd& pi, double tol = 1e-10) {
  for (Eigen::Index x = 0; x < Q.rows(); ++x)
    for (Eigen::Index y = x + 1; y < Q.cols(); ++y)
      if (std::abs(pi(x) * Q(x, y) - pi(y) * Q(y, x)) > tol) return false;
  return true;
}

/// Solves pi (Q - I) = 0 with sum(pi) = 1 as one overdetermined dense system.
inline StationaryResult stationary(const ChainSpec& spec) {
  require_valid(spec);
  const Eigen::Index k = spec.Q.rows();
  if (closed_classes(spec.Q).size() > 1)
    throw Error(ErrorCode::NotIrreducible, "chain has more than one closed communicating class", "Q");

  Eigen::MatrixXd A(k + 1, k);
  A.topRows(k) = spec.Q.transpose() - Eigen::MatrixXd::Identity(k, k);
  A.row(k).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(k + 1);
  b(k) = 1.0;
  Eigen::VectorXd pi = A.colPivHouseholderQr().solve(b);
  int ncomp = 0;
  const auto comp = strong_components(spec.Q, &ncomp);
  const int closed = closed_classes(spec.Q).front();
  // transient states carry no stationary mass
  for (Eigen::Index i = 0; i < k; ++i)
    if (pi(i) < 0.0 || comp[i] != closed) pi(i) = 0.0;
  pi /= pi.sum();

  StationaryResult out;
  out.pi = pi;
  out.pi_star = pi.minCoeff();
  out.irreducible = ncomp == 1;
  out.reversible = is_reversible(spec.Q, pi);
  return out;
}

/// Power iteration on the lazy kernel (I + Q)/2; only used to cross-check the direct solve.
inline Eigen::VectorXd stationary_power(const ChainSpec& spec, int max_iter = 1000000, double tol = 1e-14) {
  const Eigen::Index k = spec.Q.rows();
  const Eigen::MatrixXd lazy = 0.5 * (Eigen::MatrixXd::Identity(k, k) + spec.Q);
  Eigen::RowVectorXd v = Eigen::RowVectorXd::Constant(k, 1.0 / static_cast<double>(k));
  for (int it = 0; it < max_iter; ++it) {
    Eigen::RowVectorXd w = v * lazy;
    const double diff = (w - v).cwiseAbs().maxCoeff();
    v = w;
    if (diff < tol) break;
  }
  return v.transpose() / v.sum();
}

// -------------------------------------------------------------- sampling

struct Trajectory {
  std::size_t num_states = 0;
  std::vector<int> indices;
  std::uint64_t seed = 0;

  std::size_t size() const { return indices.size(); }
};

/// Inverse-CDF sampler over precomputed cumulative rows.
class ChainSampler {
 public:
  explicit ChainSampler(const ChainSpec& spec) : ChainSampler(spec.Q, spec.nu) {}

  ChainSampler(const Eigen::MatrixXd& Q, const Eigen::VectorXd& start) : k_(static_cast<int>(Q.rows())) {
    rows_.resize(static_cast<std::size_t>(k_));
    for (int r = 0; r < k_; ++r) rows_[r] = cumulative(Q.row(r).transpose());
    start_ = cumulative(start);
  }

  int initial(SplitMix64& rng) const { return pick(start_, rng.uniform()); }
  int step(int x, SplitMix64& rng) const { return pick(rows_[static_cast<std::size_t>(x)], rng.uniform()); }

  void fill(std::vector<int>& out, std::size_t n, SplitMix64& rng) const {
    out.resize(n);
    if (n == 0) return;
    out[0] = initial(rng);
    for (std::size_t i = 1; i < n; ++i) out[i] = step(out[i - 1], rng);
  }

  int states() const { return k_; }

 private:
  static std::vector<double> cumulative(const Eigen::VectorXd& p) {
    std::vector<double> c(static_cast<std::size_t>(p.size()));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) c[i] = (acc += p(i));
    return c;
  }

  // u < c[j] picks j; rounding slack at the top falls back to the last positive entry.
  static int pick(const std::vector<double>& c, double u) {
    const double total = c.back();
    const auto it = std::upper_bound(c.begin(), c.end(), u * total);
    std::size_t j = static_cast<std::size_t>(it - c.begin());
    if (j >= c.size()) j = c.size() - 1;
    while (j > 0 && c[j] == c[j - 1]) --j;
    return static_cast<int>(j);
  }

  int k_;
  std::vector<std::vector<double>> rows_;
  std::vector<double> start_;
};

inline Trajectory sample_trajectory(const ChainSpec& spec, std::size_t n, std::uint64_t seed) {
  require_valid(spec);
  require(n >= 1, ErrorCode::InvalidInput, "trajectory length must be at least 1", "n");
  ChainSampler sampler(spec);
  SplitMix64 rng(seed);
  Trajectory t;
  t.num_states = spec.size();
  t.seed = seed;
  sampler.fill(t.indices, n, rng);
  return t;
}

inline Eigen::VectorXd occupation(const Trajectory& traj) {
  Eigen::VectorXd occ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(traj.num_states));
  for (int x : traj.indices) occ(x) += 1.0;
  return occ;
}

// ----------------------------------------------------------------- lifts

/// Chain on (x, y) pairs, index x*|Y| + y: labels drawn from g(x', .) after each move.
inline ChainSpec lift_hmm(const ChainSpec& spec, const Eigen::MatrixXd& g,
                          const std::vector<std::string>& labels = {}) {
  require_valid(spec);
  require(g.rows() == spec.Q.rows(), ErrorCode::DimensionMismatch,
          "emission has " + std::to_string(g.rows()) + " rows, chain has " + std::to_string(spec.size()) + " states", "emission");
  for (Eigen::Index r = 0; r < g.rows(); ++r) require_distribution(g.row(r).transpose(), "emission");
  const Eigen::Index S = spec.Q.rows(), Y = g.cols();
  ChainSpec out;
  out.Q = Eigen::MatrixXd::Zero(S * Y, S * Y);
  out.nu = Eigen::VectorXd::Zero(S * Y);
  for (Eigen::Index x = 0; x < S; ++x)
    for (Eigen::Index y = 0; y < Y; ++y) {
      const Eigen::Index i = x * Y + y;
      out.nu(i) = spec.nu(x) * g(x, y);
      out.states.push_back(spec.states[x] + "|" + (labels.empty() ? std::to_string(y) : labels[y]));
      for (Eigen::Index x2 = 0; x2 < S; ++x2)
        for (Eigen::Index y2 = 0; y2 < Y; ++y2) out.Q(i, x2 * Y + y2) = spec.Q(x, x2) * g(x2, y2);
    }
  return out;
}

/// Chain on (x, w) pairs, index x*|W| + w, with w redrawn from the prior at every step.
inline ChainSpec lift_prior_product(const ChainSpec& spec, const Eigen::VectorXd& prior) {
  require_valid(spec);
  require_distribution(prior, "prior");
  const Eigen::Index S = spec.Q.rows(), W = prior.size();
  ChainSpec out;
  out.Q = Eigen::MatrixXd::Zero(S * W, S * W);
  out.nu = Eigen::VectorXd::Zero(S * W);
  for (Eigen::Index x = 0; x < S; ++x)
    for (Eigen::Index w = 0; w < W; ++w) {
      const Eigen::Index i = x * W + w;
      out.nu(i) = spec.nu(x) * prior(w);
      out.states.push_back(spec.states[x] + "|w" + std::to_string(w));
      for (Eigen::Index x2 = 0; x2 < S; ++x2)
        for (Eigen::Index w2 = 0; w2 < W; ++w2) out.Q(i, x2 * W + w2) = spec.Q(x, x2) * prior(w2);
    }
  return out;
}

struct KernelEstimate {
  ChainSpec chain;
  std::vector<bool> unvisited;  // rows defaulted to uniform
};

/// Plug-in transition counts with additive smoothing; nu-hat is the point mass at X_1.
inline KernelEstimate estimate_kernel(const Trajectory& traj, double smoothing) {
  require(traj.size() >= 2, ErrorCode::InvalidInput, "trajectory needs at least 2 points", "trajectory");
  require(std::isfinite(smoothing) && smoothing >= 0.0, ErrorCode::InvalidInput, "smoothing must be >= 0", "smoothing");
  const Eigen::Index k = static_cast<Eigen::Index>(traj.num_states);
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t i = 1; i < traj.size(); ++i) counts(traj.indices[i - 1], traj.indices[i]) += 1.0;
  KernelEstimate est;
  est.unvisited.assign(static_cast<std::size_t>(k), false);
  Eigen::MatrixXd Q(k, k);
  for (Eigen::Index r = 0; r < k; ++r) {
    const double denom = counts.row(r).sum() + static_cast<double>(k) * smoothing;
    if (denom <= 0.0) {
      Q.row(r).setConstant(1.0 / static_cast<double>(k));
      est.unvisited[r] = true;
    } else {
      for (Eigen::Index c = 0; c < k; ++c) Q(r, c) = (counts(r, c) + smoothing) / denom;
    }
  }
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(k);
  nu(traj.indices.front()) = 1.0;
  est.chain = make_chain(Q, nu);
  return est;
}

}  // namespace genbound

#endif  // GENBOUND_CHAIN_HPP
