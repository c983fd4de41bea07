#ifndef GENBOUND_MIXING_HPP
#define GENBOUND_MIXING_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "genbound/chain.hpp"
#include "genbound/error.hpp"

namespace genbound {

/// Guarded clamps t_mix(eps) at 1 (so d(0) plays no role); literal follows the infimum as written.
enum class GuardMode { Guarded, Literal };

inline std::string to_string(GuardMode m) { return m == GuardMode::Guarded ? "guarded" : "literal"; }

inline constexpr double kHorizonTarget = 1e-6;
inline constexpr std::size_t kFallbackHorizon = 1000;
inline constexpr double kTieTol = 1e-12;  // d(t) <= eps is read with this slack

struct MixingProfile {
  std::vector<double> d_raw;     // d(0..T_max) as computed
  std::vector<double> d_values;  // running minimum of d_raw
  std::size_t T_max = 0;
  bool converged = false;        // d(T_max) < 1e-6
  bool periodic = false;
};

inline double tv_distance(const Eigen::RowVectorXd& p, const Eigen::VectorXd& q) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < q.size(); ++i) acc += std::abs(p(i) - q(i));
  return std::min(1.0, 0.5 * acc);
}

/// Horizon cap 10|S| ceil(1/gamma*) when the gap is positive.
inline std::size_t default_horizon_cap(std::size_t states, double gamma_star) {
  if (gamma_star <= 0.0) return kFallbackHorizon;
  const double c = 10.0 * static_cast<double>(states) * std::ceil(1.0 / gamma_star);
  return static_cast<std::size_t>(std::min(c, 1e7));
}

/// d(t) = max_x TV(Q^t(x,.), pi) by propagating every start row one step at a time.
/// With T_max given the profile runs exactly that far; otherwise it stops at the
/// first d(t) < 1e-6 or at `cap`.
inline MixingProfile tv_profile(const ChainSpec& spec, const StationaryResult& st,
                                std::optional<std::size_t> T_max = std::nullopt,
                                std::size_t cap = kFallbackHorizon) {
  if (!st.irreducible) throw Error(ErrorCode::NotIrreducible, "mixing profile needs an irreducible chain", "Q");
  const Eigen::Index k = spec.Q.rows();
  Eigen::MatrixXd rows = Eigen::MatrixXd::Identity(k, k);
  MixingProfile prof;
  prof.periodic = chain_period(spec.Q) > 1;
  const std::size_t limit = T_max ? *T_max : cap;
  for (std::size_t t = 0;; ++t) {
    double d = 0.0;
    for (Eigen::Index x = 0; x < k; ++x) d = std::max(d, tv_distance(rows.row(x), st.pi));
    prof.d_raw.push_back(d);
    const double prev = prof.d_values.empty() ? d : std::min(prof.d_values.back(), d);
    prof.d_values.push_back(prev);
    if (t >= limit || (!T_max && d < kHorizonTarget)) break;
    rows = (rows * spec.Q).eval();
  }
  prof.T_max = prof.d_values.size() - 1;
  prof.converged = prof.d_values.back() < kHorizonTarget;
  return prof;
}

/// Smallest t with d(t) <= eps (guarded: at least 1). Unresolved when the horizon is too short.
inline std::size_t t_mix(const MixingProfile& prof, double eps, GuardMode mode = GuardMode::Guarded) {
  require(eps > 0.0 && eps < 1.0, ErrorCode::InvalidInput, "epsilon must lie in (0,1)", "epsilon");
  for (std::size_t t = 0; t < prof.d_values.size(); ++t)
    if (prof.d_values[t] <= eps + kTieTol) return mode == GuardMode::Guarded ? std::max<std::size_t>(t, 1) : t;
  throw Error(ErrorCode::Unresolved,
              "d(t) stays above " + detail::fmt(eps) + " up to T_max=" + std::to_string(prof.T_max), "T_max");
}

inline double tau_factor(double eps) {
  const double r = (2.0 - eps) / (1.0 - eps);
  return r * r;
}

/// inf over eps of t_mix(eps)((2-eps)/(1-eps))^2. The step function t_mix only
/// changes at eps = d(t), and the factor grows with eps, so the candidates are
/// exactly those values.
inline double tau_min(const MixingProfile& prof, GuardMode mode = GuardMode::Guarded) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t first = mode == GuardMode::Guarded ? 1 : 0;
  for (std::size_t t = first; t < prof.d_values.size(); ++t) {
    const double eps = prof.d_values[t];
    if (eps >= 1.0) continue;
    std::size_t tm = t;
    while (tm > 0 && prof.d_values[tm - 1] <= eps + kTieTol) --tm;
    if (mode == GuardMode::Guarded) tm = std::max<std::size_t>(tm, 1);
    best = std::min(best, static_cast<double>(tm) * tau_factor(eps));
  }
  return best;
}

struct GapBracket {
  double lower = 0.0;
  double upper = 0.0;
  bool degenerate = false;
};

/// (1/gamma* - 1) log 2 <= t_mix <= log(4/pi_*)/gamma*.
inline GapBracket gap_mixing_bracket(double gamma_star, double pi_star) {
  require(pi_star > 0.0 && pi_star <= 1.0, ErrorCode::InvalidInput, "pi_star must lie in (0,1]", "pi_star");
  require(gamma_star >= 0.0 && gamma_star <= 1.0, ErrorCode::InvalidInput, "gamma_star must lie in [0,1]", "gamma_star");
  GapBracket b;
  if (gamma_star == 0.0) {
    b.lower = b.upper = std::numeric_limits<double>::infinity();
    b.degenerate = true;
    return b;
  }
  b.lower = (1.0 / gamma_star - 1.0) * std::log(2.0);
  b.upper = std::log(4.0 / pi_star) / gamma_star;
  return b;
}

}  // namespace genbound

#endif  // GENBOUND_MIXING_HPP
