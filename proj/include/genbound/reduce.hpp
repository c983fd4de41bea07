#ifndef GENBOUND_REDUCE_HPP
#define GENBOUND_REDUCE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "genbound/chain.hpp"
#include "genbound/error.hpp"
#include "genbound/random.hpp"

namespace genbound {

inline constexpr double kUnitRootTol = 1e-12;

/// Y_{k+1} = G Y_k with Y_k = (X_{k+m-1}, ..., X_k) - u.
struct CompanionLift {
  Eigen::MatrixXd G;
  std::vector<double> a;
  double u = 0.0;
  std::size_t order() const { return a.size(); }
};

inline Eigen::MatrixXd companion_matrix(const std::vector<double>& a) {
  require(!a.empty(), ErrorCode::InvalidInput, "need at least one coefficient", "a");
  const auto m = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) G(0, i) = a[static_cast<std::size_t>(i)];
  for (Eigen::Index r = 1; r < m; ++r) G(r, r - 1) = 1.0;
  return G;
}

inline CompanionLift companion_lift(const std::vector<double>& a) {
  for (double v : a) require(std::isfinite(v), ErrorCode::InvalidInput, "non-finite coefficient", "a");
  return {companion_matrix(a), a, 0.0};
}

inline double unit_root_offset(const std::vector<double>& a, double c) {
  double s = 0.0;
  for (double v : a) s += v;
  require(std::abs(1.0 - s) > kUnitRootTol, ErrorCode::UnitRootOffset,
          "coefficients sum to 1, so the offset c/(1 - sum a) is undefined", "a");
  return c / (1.0 - s);
}

/// X_k = c + sum a_i X_{k-i}: u is the fixed point c/(1 - sum a) and X - u follows the companion recursion.
inline CompanionLift affine_lift(const std::vector<double>& a, double c) {
  auto lift = companion_lift(a);
  lift.u = unit_root_offset(a, c);
  return lift;
}

/// Row-by-row product accumulated left to right; the recursions below use the same order.
inline Eigen::VectorXd apply_in_order(const Eigen::MatrixXd& G, const Eigen::VectorXd& y) {
  Eigen::VectorXd out(G.rows());
  for (Eigen::Index r = 0; r < G.rows(); ++r) {
    double acc = 0.0;
    for (Eigen::Index c = 0; c < G.cols(); ++c) acc += G(r, c) * y(c);
    out(r) = acc;
  }
  return out;
}

struct DualRun {
  std::vector<double> direct;
  std::vector<double> lifted;
  double max_deviation = 0.0;
};

inline double max_abs_diff(const std::vector<double>& x, const std::vector<double>& y) {
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
  return d;
}

/// Runs the recursion X_k = sum a_i X_{k-i} from `history` (oldest first, m values)
/// and the companion system side by side for `steps` steps. With matching op
/// order the two agree bit for bit.
inline DualRun simulate_companion(const CompanionLift& lift, const std::vector<double>& history, std::size_t steps) {
  const std::size_t m = lift.order();
  require(history.size() == m, ErrorCode::DimensionMismatch, "history needs one value per coefficient", "history");
  DualRun run;
  std::vector<double> x(history);
  Eigen::VectorXd y(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) y(static_cast<Eigen::Index>(i)) = history[m - 1 - i] - lift.u;
  for (std::size_t k = 0; k < steps; ++k) {
    double acc = 0.0;
    for (std::size_t i = 1; i <= m; ++i) acc += lift.a[i - 1] * (x[x.size() - i] - lift.u);
    x.push_back(acc + lift.u);
    y = apply_in_order(lift.G, y);
    run.direct.push_back(x.back());
    run.lifted.push_back(y(0) + lift.u);
  }
  run.max_deviation = max_abs_diff(run.direct, run.lifted);
  return run;
}

/// Direct affine recursion X_k = c + sum a_i X_{k-i} against the lifted X - u system.
inline DualRun simulate_affine(const std::vector<double>& a, double c, const std::vector<double>& history,
                               std::size_t steps) {
  const auto lift = affine_lift(a, c);
  const std::size_t m = a.size();
  require(history.size() == m, ErrorCode::DimensionMismatch, "history needs one value per coefficient", "history");
  DualRun run;
  std::vector<double> x(history);
  Eigen::VectorXd y(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) y(static_cast<Eigen::Index>(i)) = history[m - 1 - i] - lift.u;
  for (std::size_t k = 0; k < steps; ++k) {
    double acc = c;
    for (std::size_t i = 1; i <= m; ++i) acc += a[i - 1] * x[x.size() - i];
    x.push_back(acc);
    y = apply_in_order(lift.G, y);
    run.direct.push_back(acc);
    run.lifted.push_back(y(0) + lift.u);
  }
  run.max_deviation = max_abs_diff(run.direct, run.lifted);
  return run;
}

// ------------------------------------------------------------------ ARMA

/// State Z_k = (X_k - u, ..., X_{k-m+1} - u, V_k, ..., V_{k-q}) with V_k the
/// cumulative noise; Z_{k+1} = G Z_k + eps_{k+1}(e_0 + e_m).
struct ArmaLift {
  Eigen::MatrixXd G;
  double c = 0.0;
  std::vector<double> a, theta;
  double u = 0.0;
  std::vector<std::size_t> noise_positions;

  std::size_t m() const { return a.size(); }
  std::size_t q() const { return theta.size(); }
  std::size_t dim() const { return a.size() + theta.size() + 1; }
};

inline ArmaLift arma_lift(double c, const std::vector<double>& a, const std::vector<double>& theta) {
  require(!a.empty(), ErrorCode::InvalidInput, "need at least one AR coefficient", "a");
  require(!theta.empty(), ErrorCode::InvalidInput, "need at least one MA coefficient", "theta");
  ArmaLift L;
  L.c = c;
  L.a = a;
  L.theta = theta;
  L.u = unit_root_offset(a, c);
  const auto m = static_cast<Eigen::Index>(a.size()), q = static_cast<Eigen::Index>(theta.size());
  const Eigen::Index d = m + q + 1;
  L.G = Eigen::MatrixXd::Zero(d, d);
  L.G.topLeftCorner(m, m) = companion_matrix(a);
  // theta differences against (V_k, ..., V_{k-q})
  L.G(0, m) = theta[0];
  for (Eigen::Index i = 1; i < q; ++i)
    L.G(0, m + i) = theta[static_cast<std::size_t>(i)] - theta[static_cast<std::size_t>(i - 1)];
  L.G(0, m + q) = -theta.back();
  L.G(m, m) = 1.0;
  for (Eigen::Index r = m + 1; r < d; ++r) L.G(r, r - 1) = 1.0;
  L.noise_positions = {0, static_cast<std::size_t>(m)};
  return L;
}

/// Pre-generated N(0, sigma^2) innovations consumed by both simulators.
inline std::vector<double> gaussian_noise(std::size_t count, double sigma, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  std::vector<double> eps(count);
  for (auto& e : eps) e = normal(rng);
  return eps;
}

/// Direct ARMA recursion vs the lifted linear system, from X = u and zero past noise.
inline DualRun simulate_arma(const ArmaLift& L, const std::vector<double>& eps) {
  const std::size_t m = L.m(), q = L.q();
  DualRun run;
  std::vector<double> x(m, L.u);
  std::vector<double> e(q, 0.0);  // past innovations, oldest first
  Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(L.dim()));
  for (double ek : eps) {
    double acc = L.c + ek;
    for (std::size_t i = 1; i <= m; ++i) acc += L.a[i - 1] * x[x.size() - i];
    for (std::size_t i = 1; i <= q; ++i) acc += L.theta[i - 1] * e[e.size() - i];
    x.push_back(acc);
    e.push_back(ek);
    z = apply_in_order(L.G, z);
    for (std::size_t p : L.noise_positions) z(static_cast<Eigen::Index>(p)) += ek;
    run.direct.push_back(acc);
    run.lifted.push_back(z(0) + L.u);
  }
  run.max_deviation = max_abs_diff(run.direct, run.lifted);
  return run;
}

// --------------------------------------------------------------- mixture

/// Y = sum alpha_l X^(l) for independent chains X^(l) with numeric state values.
struct MixtureComponent {
  ChainSpec chain;
  std::vector<double> values;
};

/// Product chain over S_1 x ... x S_m (component 0 most significant) with the
/// triangular coordinate change Z = G x, Z_0 = Y.
struct MixtureLift {
  Eigen::MatrixXd G;
  std::vector<double> alphas;
  std::vector<std::size_t> radix;
  ChainSpec product;
  Eigen::MatrixXd coords;  // column s holds the component values of product state s

  double det() const { return G.determinant(); }

  std::vector<std::size_t> decode(std::size_t s) const {
    std::vector<std::size_t> idx(radix.size());
    for (std::size_t l = radix.size(); l-- > 0;) {
      idx[l] = s % radix[l];
      s /= radix[l];
    }
    return idx;
  }

  std::size_t encode(const std::vector<std::size_t>& idx) const {
    std::size_t s = 0;
    for (std::size_t l = 0; l < radix.size(); ++l) s = s * radix[l] + idx[l];
    return s;
  }

  /// Z_0 = (G x)_0 = sum alpha_l x_l, accumulated in component order.
  double observable(std::size_t s) const {
    return apply_in_order(G, coords.col(static_cast<Eigen::Index>(s)))(0);
  }
};

inline MixtureLift mixture_lift(const std::vector<MixtureComponent>& comps, const std::vector<double>& alphas) {
  require(!comps.empty(), ErrorCode::InvalidInput, "need at least one component", "components");
  require(comps.size() == alphas.size(), ErrorCode::DimensionMismatch, "need one weight per component", "alphas");
  MixtureLift L;
  L.alphas = alphas;
  const auto m = static_cast<Eigen::Index>(comps.size());
  for (std::size_t l = 0; l < comps.size(); ++l) {
    require(alphas[l] != 0.0 && std::isfinite(alphas[l]), ErrorCode::ZeroMixtureWeight,
            "mixture weight " + std::to_string(l) + " is zero", "alphas[" + std::to_string(l) + "]");
    require_valid(comps[l].chain, "components[" + std::to_string(l) + "]");
    require(comps[l].values.size() == comps[l].chain.size(), ErrorCode::DimensionMismatch,
            "need one value per state", "components[" + std::to_string(l) + "].values");
    L.radix.push_back(comps[l].chain.size());
  }
  L.G = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = r; c < m; ++c) L.G(r, c) = alphas[static_cast<std::size_t>(c)];

  Eigen::MatrixXd Q = Eigen::MatrixXd::Ones(1, 1);
  Eigen::VectorXd nu = Eigen::VectorXd::Ones(1);
  std::vector<std::string> names{""};
  for (const auto& comp : comps) {
    const Eigen::MatrixXd& Ql = comp.chain.Q;
    Eigen::MatrixXd K(Q.rows() * Ql.rows(), Q.cols() * Ql.cols());
    for (Eigen::Index i = 0; i < Q.rows(); ++i)
      for (Eigen::Index j = 0; j < Q.cols(); ++j) K.block(i * Ql.rows(), j * Ql.cols(), Ql.rows(), Ql.cols()) = Q(i, j) * Ql;
    Q = K;
    Eigen::VectorXd v(nu.size() * comp.chain.nu.size());
    std::vector<std::string> nn;
    for (Eigen::Index i = 0; i < nu.size(); ++i)
      for (Eigen::Index j = 0; j < comp.chain.nu.size(); ++j) {
        v(i * comp.chain.nu.size() + j) = nu(i) * comp.chain.nu(j);
        const std::string& a = names[static_cast<std::size_t>(i)];
        nn.push_back(a.empty() ? comp.chain.states[static_cast<std::size_t>(j)]
                               : a + "," + comp.chain.states[static_cast<std::size_t>(j)]);
      }
    nu = v;
    names = nn;
  }
  L.product = make_chain(Q, nu);
  L.product.states = names;
  const std::size_t total = L.product.size();
  L.coords.resize(m, static_cast<Eigen::Index>(total));
  for (std::size_t s = 0; s < total; ++s) {
    const auto idx = L.decode(s);
    for (std::size_t l = 0; l < comps.size(); ++l)
      L.coords(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(s)) = comps[l].values[idx[l]];
  }
  return L;
}

struct MixtureDualRun {
  std::size_t direct_count = 0;  // #{i : f(Y_i) <= 0} from the component paths
  std::size_t lifted_count = 0;  // #{i : f(Z_0(X_i)) <= 0} from the product chain
  std::size_t steps = 0;
};

/// Component paths drive both sides: the direct side sums alpha_l x_l per step, the
/// lifted side encodes the product state and reads Z_0 off the coordinate change.
inline MixtureDualRun simulate_mixture(const MixtureLift& L, const std::vector<MixtureComponent>& comps,
                                       const std::function<double(double)>& f, std::size_t steps, std::uint64_t seed) {
  MixtureDualRun run;
  run.steps = steps;
  std::vector<std::vector<int>> paths(comps.size());
  for (std::size_t l = 0; l < comps.size(); ++l)
    paths[l] = sample_trajectory(comps[l].chain, steps, SplitMix64::stream(seed, l)()).indices;
  for (std::size_t i = 0; i < steps; ++i) {
    double y = 0.0;
    std::vector<std::size_t> idx(comps.size());
    for (std::size_t l = 0; l < comps.size(); ++l) {
      idx[l] = static_cast<std::size_t>(paths[l][i]);
      y += L.alphas[l] * comps[l].values[idx[l]];
    }
    if (f(y) <= 0.0) ++run.direct_count;
    if (f(L.observable(L.encode(idx))) <= 0.0) ++run.lifted_count;
  }
  return run;
}

// ------------------------------------------------------------- windows

/// States of S^m in mixed radix with the oldest coordinate most significant.
inline std::size_t window_states(std::size_t states, std::size_t m) {
  require(m >= 1, ErrorCode::InvalidInput, "window must be at least 1", "window");
  double total = std::pow(static_cast<double>(states), static_cast<double>(m));
  require(total <= 1e7, ErrorCode::ExactTooLarge, "window chain would have " + detail::fmt(total) + " states", "window");
  return static_cast<std::size_t>(total);
}

/// f~(x_k, ..., x_{k+m-1}) = f(x_k).
inline Eigen::VectorXd lift_function(const Eigen::VectorXd& f, std::size_t m) {
  const auto S = static_cast<std::size_t>(f.size());
  const std::size_t total = window_states(S, m);
  std::size_t block = total / S;
  Eigen::VectorXd out(static_cast<Eigen::Index>(total));
  for (std::size_t s = 0; s < total; ++s) out(static_cast<Eigen::Index>(s)) = f(static_cast<Eigen::Index>(s / block));
  return out;
}

inline Trajectory window_trajectory(const Trajectory& traj, std::size_t m) {
  const std::size_t total = window_states(traj.num_states, m);
  require(traj.size() >= m, ErrorCode::InvalidInput, "trajectory shorter than the window", "window");
  Trajectory out{total, {}, traj.seed};
  for (std::size_t k = 0; k + m <= traj.size(); ++k) {
    std::size_t s = 0;
    for (std::size_t j = 0; j < m; ++j) s = s * traj.num_states + static_cast<std::size_t>(traj.indices[k + j]);
    out.indices.push_back(static_cast<int>(s));
  }
  return out;
}

/// Kernel on windows: (x_1..x_m) -> (x_2..x_m, y) with probability Q(x_m, y).
inline ChainSpec window_chain(const ChainSpec& spec, std::size_t m) {
  const std::size_t S = spec.size();
  const std::size_t total = window_states(S, m);
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(total));
  for (std::size_t s = 0; s < total; ++s) {
    const std::size_t last = s % S, tail = s % (total / S);
    for (std::size_t y = 0; y < S; ++y)
      Q(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(tail * S + y)) =
          spec.Q(static_cast<Eigen::Index>(last), static_cast<Eigen::Index>(y));
    // nu(x_1) Q(x_1, x_2) ... Q(x_{m-1}, x_m)
    std::size_t rest = s, block = total / S;
    std::size_t prev = rest / block;
    double p = spec.nu(static_cast<Eigen::Index>(prev));
    for (std::size_t j = 1; j < m; ++j) {
      rest %= block;
      block /= S;
      const std::size_t cur = rest / block;
      p *= spec.Q(static_cast<Eigen::Index>(prev), static_cast<Eigen::Index>(cur));
      prev = cur;
    }
    nu(static_cast<Eigen::Index>(s)) = p;
  }
  return make_chain(Q, nu);
}

// -------------------------------------------------------- discretization

struct Discretization {
  ChainSpec chain;
  std::vector<double> edges;    // B + 1 bin edges
  std::vector<double> centers;  // B bin midpoints
  double tv_error = 0.0;        // max TV between the B-bin kernel and the 2B-bin kernel folded back to B bins
};

namespace detail {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline Eigen::MatrixXd ar1_kernel(double c, double a, double sigma, double lo, double hi, std::size_t B) {
  const double w = (hi - lo) / static_cast<double>(B);
  Eigen::MatrixXd Q(static_cast<Eigen::Index>(B), static_cast<Eigen::Index>(B));
  for (std::size_t i = 0; i < B; ++i) {
    const double mu = c + a * (lo + (static_cast<double>(i) + 0.5) * w);
    for (std::size_t j = 0; j < B; ++j) {
      const double e0 = lo + static_cast<double>(j) * w, e1 = e0 + w;
      Q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          normal_cdf((e1 - mu) / sigma) - normal_cdf((e0 - mu) / sigma);
    }
    const double row = Q.row(static_cast<Eigen::Index>(i)).sum();
    require(row > 0.0, ErrorCode::InvalidInput, "bin " + std::to_string(i) + " sends all mass outside the range",
            "range");
    Q.row(static_cast<Eigen::Index>(i)) /= row;
  }
  return Q;
}

}  // namespace detail

/// X' = c + a X + sigma eps binned uniformly on [lo, hi]; each row is the Gaussian
/// mass of each cell from the cell midpoint, renormalized to the range.
inline Discretization discretize_ar1(double c, double a, double sigma, double lo, double hi, std::size_t B,
                                     Eigen::VectorXd nu = Eigen::VectorXd()) {
  require(sigma > 0.0 && std::isfinite(sigma), ErrorCode::InvalidInput, "sigma must be positive", "sigma");
  require(hi > lo, ErrorCode::InvalidInput, "range must have hi > lo", "range");
  require(B >= 2, ErrorCode::InvalidInput, "need at least 2 bins", "bins");
  Discretization d;
  const double w = (hi - lo) / static_cast<double>(B);
  for (std::size_t j = 0; j <= B; ++j) d.edges.push_back(lo + static_cast<double>(j) * w);
  for (std::size_t j = 0; j < B; ++j) d.centers.push_back(lo + (static_cast<double>(j) + 0.5) * w);
  const Eigen::MatrixXd Q = detail::ar1_kernel(c, a, sigma, lo, hi, B);
  const Eigen::MatrixXd F = detail::ar1_kernel(c, a, sigma, lo, hi, 2 * B);
  for (std::size_t r = 0; r < 2 * B; ++r) {
    double tv = 0.0;
    for (std::size_t j = 0; j < B; ++j) {
      const double folded = F(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(2 * j)) +
                            F(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(2 * j + 1));
      tv += std::abs(folded - Q(static_cast<Eigen::Index>(r / 2), static_cast<Eigen::Index>(j)));
    }
    d.tv_error = std::max(d.tv_error, 0.5 * tv);
  }
  if (nu.size() == 0) nu = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(B), 1.0 / static_cast<double>(B));
  d.chain = make_chain(Q, nu);
  for (std::size_t j = 0; j < B; ++j) d.chain.states[j] = "bin" + std::to_string(j);
  return d;
}

}  // namespace genbound

#endif  // GENBOUND_REDUCE_HPP
