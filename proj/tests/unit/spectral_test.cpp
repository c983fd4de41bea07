#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "genbound/spectral.hpp"
#include "support/battery.hpp"

using namespace genbound;

namespace {

/// Metropolis chain for a random target with a symmetric uniform proposal; reversible by construction.
ChainSpec random_reversible(int k, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Eigen::VectorXd pi(k);
  for (int i = 0; i < k; ++i) pi(i) = 0.1 + rng.uniform();
  pi /= pi.sum();
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(k, k);
  for (int x = 0; x < k; ++x) {
    for (int y = 0; y < k; ++y)
      if (y != x) Q(x, y) = (1.0 / k) * std::min(1.0, pi(y) / pi(x));
    Q(x, x) = 1.0 - (Q.row(x).sum() - Q(x, x));
  }
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(k);
  nu(0) = 1.0;
  return make_chain(Q, nu);
}

ChainSpec permute(const ChainSpec& spec, const std::vector<int>& perm) {
  const int k = static_cast<int>(spec.size());
  Eigen::MatrixXd Q(k, k);
  Eigen::VectorXd nu(k);
  for (int a = 0; a < k; ++a) {
    nu(perm[a]) = spec.nu(a);
    for (int b = 0; b < k; ++b) Q(perm[a], perm[b]) = spec.Q(a, b);
  }
  return make_chain(Q, nu);
}

}  // namespace

TEST(L2Gap, IidIsZero) {
  const auto spec = iid_chain(Eigen::VectorXd::Constant(3, 1.0 / 3.0));
  EXPECT_EQ(l2_gap(spec, stationary(spec)), 0.0);
}

TEST(L2Gap, TwoStateMatchesSecondEigenvalue) {
  for (double p : {0.1, 0.25, 0.4}) {
    const auto spec = two_state_chain(p, p);
    // eigenvalues of [[1-p,p],[p,1-p]] are 1 and 1-2p
    EXPECT_NEAR(l2_gap(spec, stationary(spec)), std::abs(1.0 - 2.0 * p), 1e-12);
  }
}

TEST(L2Gap, PeriodicFlipIsOne) {
  Eigen::MatrixXd Q(2, 2);
  Q << 0, 1, 1, 0;
  const auto spec = make_chain(Q, Eigen::VectorXd::Constant(2, 0.5));
  EXPECT_NEAR(l2_gap(spec, stationary(spec)), 1.0, 1e-12);
}

TEST(AbsoluteGap, ClosedForms) {
  EXPECT_EQ(absolute_gap(iid_chain(Eigen::VectorXd::Constant(2, 0.5))), 1.0);
  EXPECT_NEAR(absolute_gap(two_state_chain(0.25, 0.25)), 0.5, 1e-12);
  Eigen::VectorXd nu(2);
  nu << 1, 0;
  EXPECT_EQ(absolute_gap(make_chain(Eigen::MatrixXd::Identity(2, 2), nu)), 0.0);
}

TEST(AbsoluteGap, AsymmetricTwoState) {
  // second eigenvalue 1 - p - q
  EXPECT_NEAR(absolute_gap(two_state_chain(0.3, 0.1)), 0.4, 1e-12);
}

TEST(SpectralIdentities, ReversibleChainsSatisfyLambdaEqualsOneMinusGap) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto spec = random_reversible(2 + static_cast<int>(s % 5), 300 + s);
    const auto st = stationary(spec);
    ASSERT_TRUE(st.reversible);
    const double lambda = l2_gap(spec, st);
    double second = 0.0;
    const auto ev = spectrum(spec.Q);
    for (std::size_t i = 1; i < ev.size(); ++i) second = std::max(second, std::abs(ev[i]));
    EXPECT_NEAR(lambda, second, 1e-9);
    EXPECT_NEAR(lambda, 1.0 - absolute_gap(spec), 1e-9);
  }
}

TEST(SpectralIdentities, NonReversibleLowerRelationOnly) {
  for (const auto& c : battery::chains()) {
    const auto st = stationary(c.spec);
    EXPECT_GE(l2_gap(c.spec, st), 1.0 - absolute_gap(c.spec) - 1e-9) << c.name;
  }
}

TEST(SpectralIdentities, SimilarityPreservesSpectrum) {
  for (const auto& c : battery::chains()) {
    const auto st = stationary(c.spec);
    const Eigen::VectorXd s = st.pi.cwiseSqrt();
    const Eigen::MatrixXd B = s.asDiagonal() * c.spec.Q * s.cwiseInverse().asDiagonal();
    const auto a = spectrum(c.spec.Q);
    const auto b = spectrum(B);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LT(std::abs(a[i] - b[i]), 1e-9) << c.name;
    EXPECT_LT(std::abs(a[0] - 1.0), 1e-10);
    for (const auto& e : a) EXPECT_LE(std::abs(e), 1.0 + 1e-10);
  }
}

TEST(ChiDivergence, ZeroAtStationarity) {
  const auto spec = battery::random_chain(4, 2);
  auto at_pi = spec;
  at_pi.nu = stationary(spec).pi;
  const auto st = stationary(at_pi);
  EXPECT_NEAR(chi_divergence(at_pi, st, NormConvention::PiWeighted), 0.0, 1e-12);
  EXPECT_NEAR(chi_divergence(at_pi, st, NormConvention::Unweighted), 0.0, 1e-12);
}

TEST(ChiDivergence, HandValues) {
  Eigen::VectorXd nu(2);
  nu << 1, 0;
  const auto spec = two_state_chain(0.25, 0.25, nu);
  const auto st = stationary(spec);
  // nu/pi - 1 = (1, -1)
  EXPECT_NEAR(chi_divergence(spec, st, NormConvention::PiWeighted), 1.0, 1e-12);
  EXPECT_NEAR(chi_divergence(spec, st, NormConvention::Unweighted), std::sqrt(2.0), 1e-12);
}

TEST(ChiDivergence, RelabelingInvariant) {
  const auto spec = battery::random_chain(4, 17);
  const auto perm = permute(spec, {2, 0, 3, 1});
  EXPECT_NEAR(chi_divergence(spec, stationary(spec)), chi_divergence(perm, stationary(perm)), 1e-12);
}

TEST(ChiDivergence, DivergentWhenPiVanishes) {
  Eigen::MatrixXd Q(2, 2);
  Q << 0.5, 0.5, 0.0, 1.0;
  Eigen::VectorXd nu(2);
  nu << 1, 0;
  const auto spec = make_chain(Q, nu);
  const auto st = stationary(spec);
  EXPECT_FALSE(st.irreducible);
  try {
    chi_divergence(spec, st);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DivergentDensity);
    EXPECT_EQ(e.field(), "nu");
  }
}
