#ifndef GENBOUND_ANALYSIS_HPP
#define GENBOUND_ANALYSIS_HPP

#include <cstddef>
#include <optional>

#include "genbound/chain.hpp"
#include "genbound/mixing.hpp"
#include "genbound/spectral.hpp"

namespace genbound {

struct AnalysisOptions {
  NormConvention convention = NormConvention::PiWeighted;
  GuardMode guard = GuardMode::Guarded;
  std::optional<std::size_t> T_max;
  std::size_t fallback_horizon = kFallbackHorizon;
};

/// Everything the bound evaluators need from a chain, computed once.
struct ChainAnalysis {
  StationaryResult stationary;
  SpectralReport spectral;
  double chi_div_pi_weighted = 0.0;
  double chi_div_unweighted = 0.0;
  MixingProfile profile;
  double tau_min_guarded = 0.0;
  double tau_min_literal = 0.0;
  GuardMode guard = GuardMode::Guarded;

  double lambda() const { return spectral.lambda; }
  double chi_div() const { return spectral.chi_div; }
  double tau() const { return guard == GuardMode::Guarded ? tau_min_guarded : tau_min_literal; }
};

inline ChainAnalysis analyze_chain(const ChainSpec& spec, const AnalysisOptions& opt = {}) {
  ChainAnalysis a;
  a.guard = opt.guard;
  a.stationary = stationary(spec);
  a.spectral = analyze_spectrum(spec, a.stationary, opt.convention);
  a.chi_div_pi_weighted = a.spectral.in_M2 ? chi_divergence(spec, a.stationary, NormConvention::PiWeighted)
                                           : a.spectral.chi_div;
  a.chi_div_unweighted = a.spectral.in_M2 ? chi_divergence(spec, a.stationary, NormConvention::Unweighted)
                                          : a.spectral.chi_div;
  const std::size_t cap = a.spectral.gamma_star > 0.0 ? default_horizon_cap(spec.size(), a.spectral.gamma_star)
                                                      : opt.fallback_horizon;
  a.profile = tv_profile(spec, a.stationary, opt.T_max, cap);
  a.tau_min_guarded = tau_min(a.profile, GuardMode::Guarded);
  a.tau_min_literal = tau_min(a.profile, GuardMode::Literal);
  return a;
}

}  // namespace genbound

#endif  // GENBOUND_ANALYSIS_HPP
