#ifndef GENBOUND_SPECTRAL_HPP
#define GENBOUND_SPECTRAL_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "genbound/chain.hpp"
#include "genbound/error.hpp"

namespace genbound {

enum class NormConvention { PiWeighted, Unweighted };

inline std::string to_string(NormConvention c) {
  return c == NormConvention::PiWeighted ? "pi-weighted" : "unweighted";
}

inline constexpr double kUnitCluster = 1e-9;
inline constexpr double kRoundoffFloor = 1e-13;  // smaller lambda, chi or |xi| is rounding noise

struct SpectralReport {
  double lambda = 0.0;
  double gamma_star = 0.0;
  std::vector<std::complex<double>> spectrum;
  double chi_div = 0.0;
  bool in_M2 = true;
  NormConvention norm_convention = NormConvention::PiWeighted;
};

inline std::vector<std::complex<double>> spectrum(const Eigen::MatrixXd& Q) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(Q, false);
  std::vector<std::complex<double>> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(out.begin(), out.end(), [](auto a, auto b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return out;
}

/// Operator norm of Q - 1 pi^T on L2(pi): top singular value of D^{1/2}(Q - 1 pi^T)D^{-1/2}.
inline double l2_gap(const ChainSpec& spec, const StationaryResult& st) {
  if (!st.irreducible || st.pi_star <= 0.0)
    throw Error(ErrorCode::NotIrreducible, "L2 gap needs an irreducible chain with pi > 0", "Q");
  const Eigen::Index k = spec.Q.rows();
  const Eigen::VectorXd s = st.pi.cwiseSqrt();
  Eigen::MatrixXd A = spec.Q - Eigen::VectorXd::Ones(k) * st.pi.transpose();
  for (Eigen::Index r = 0; r < k; ++r)
    for (Eigen::Index c = 0; c < k; ++c) A(r, c) *= s(r) / s(c);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const double top = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  return top < kRoundoffFloor ? 0.0 : std::clamp(top, 0.0, 1.0);
}

/// 1 - max |xi| over non-unit eigenvalues; 0 when eigenvalue 1 is not simple.
inline double absolute_gap(const ChainSpec& spec) {
  const auto ev = spectrum(spec.Q);
  int unit = 0;
  double second = 0.0;
  for (const auto& e : ev) {
    if (std::abs(e - std::complex<double>(1.0, 0.0)) < kUnitCluster) ++unit;
    else second = std::max(second, std::abs(e));
  }
  if (unit != 1) return 0.0;
  return second < kRoundoffFloor ? 1.0 : std::clamp(1.0 - second, 0.0, 1.0);
}

/// ||dnu/dpi - 1||_2 in either convention.
inline double chi_divergence(const ChainSpec& spec, const StationaryResult& st,
                             NormConvention convention = NormConvention::PiWeighted) {
  double acc = 0.0;
  for (Eigen::Index x = 0; x < spec.nu.size(); ++x) {
    const double p = st.pi(x), v = spec.nu(x);
    if (p <= 0.0) {
      if (v > 0.0)
        throw Error(ErrorCode::DivergentDensity,
                    "nu puts mass on state " + std::to_string(x) + " where pi vanishes", "nu");
      continue;
    }
    const double r = v / p - 1.0;
    acc += (convention == NormConvention::PiWeighted ? p : 1.0) * r * r;
  }
  const double chi = std::sqrt(acc);
  return chi < kRoundoffFloor ? 0.0 : chi;
}

inline SpectralReport analyze_spectrum(const ChainSpec& spec, const StationaryResult& st,
                                       NormConvention convention = NormConvention::PiWeighted) {
  SpectralReport rep;
  rep.lambda = l2_gap(spec, st);
  rep.gamma_star = absolute_gap(spec);
  rep.spectrum = spectrum(spec.Q);
  rep.norm_convention = convention;
  try {
    rep.chi_div = chi_divergence(spec, st, convention);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DivergentDensity) throw;
    rep.in_M2 = false;
    rep.chi_div = std::numeric_limits<double>::infinity();
  }
  return rep;
}

}  // namespace genbound

#endif  // GENBOUND_SPECTRAL_HPP
