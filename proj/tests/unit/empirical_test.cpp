#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "genbound/empirical.hpp"
#include "support/battery.hpp"

using namespace genbound;

namespace {

Eigen::MatrixXd row(std::initializer_list<double> xs) {
  Eigen::MatrixXd m(1, static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) m(0, i++) = x;
  return m;
}

/// Brute-force R_n: loops over every path and sign vector separately (no Gray code).
double brute_rademacher(const FunctionClass& cls, const ChainSpec& spec, std::size_t n) {
  const int k = static_cast<int>(spec.size());
  std::size_t paths = 1;
  for (std::size_t i = 0; i < n; ++i) paths *= static_cast<std::size_t>(k);
  double total = 0.0;
  for (std::size_t code = 0; code < paths; ++code) {
    std::vector<int> path(n);
    std::size_t c = code;
    for (std::size_t i = 0; i < n; ++i) {
      path[i] = static_cast<int>(c % static_cast<std::size_t>(k));
      c /= static_cast<std::size_t>(k);
    }
    double p = spec.nu(path[0]);
    for (std::size_t i = 1; i < n; ++i) p *= spec.Q(path[i - 1], path[i]);
    if (p == 0.0) continue;
    double avg = 0.0;
    for (std::size_t s = 0; s < (std::size_t{1} << n); ++s) {
      double best = 0.0;
      for (Eigen::Index f = 0; f < cls.values.rows(); ++f) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += ((s >> i) & 1 ? -1.0 : 1.0) * cls.values(f, path[i]);
        best = std::max(best, std::abs(acc));
      }
      avg += best;
    }
    total += p * avg / static_cast<double>(std::size_t{1} << n);
  }
  return total / static_cast<double>(n);
}

}  // namespace

TEST(TrueMean, Arithmetic) {
  StationaryResult st;
  st.pi = Eigen::VectorXd(2);
  st.pi << 0.25, 0.75;
  EXPECT_DOUBLE_EQ(true_mean(make_class(row({1.0, 0.0})), st)(0), 0.25);
  st.pi << 0.5, 0.5;
  EXPECT_DOUBLE_EQ(true_mean(make_class(row({1.0, -1.0})), st)(0), 0.0);
  EXPECT_DOUBLE_EQ(true_mean(make_class(row({0.3, 0.3})), st)(0), 0.3);
}

TEST(EmpiricalMean, Arithmetic) {
  Trajectory t{2, {0, 1, 0}, 0};
  EXPECT_NEAR(empirical_mean(make_class(row({1.0, -1.0})), t)(0), 1.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(empirical_mean(make_class(row({0.7, 0.7})), t)(0), 0.7);
}

TEST(EmpiricalMean, ErgodicConvergence) {
  const auto spec = battery::random_chain(3, 4);
  const auto cls = battery::random_class(1, 3, 9);
  const auto st = stationary(spec);
  const std::size_t n = 100000;
  const auto t = sample_trajectory(spec, n, 3);
  // tau_min of these dense chains is well under 10
  EXPECT_LT(std::abs(empirical_mean(cls, t)(0) - true_mean(cls, st)(0)), 5.0 * std::sqrt(10.0 / n));
}

TEST(SupDeviation, SingletonConstantAndNegationClosure) {
  const auto spec = battery::random_chain(3, 6);
  const auto st = stationary(spec);
  const auto t = sample_trajectory(spec, 50, 1);
  EXPECT_NEAR(sup_deviation(make_class(row({0.4, 0.4, 0.4})), t, st), 0.0, 1e-15);
  Eigen::MatrixXd pm(2, 3);
  pm << 0.3, -0.2, 0.9, -0.3, 0.2, -0.9;
  const auto one = make_class(pm.topRows(1));
  EXPECT_NEAR(sup_deviation(make_class(pm), t, st), sup_deviation(one, t, st), 1e-15);
  const auto cls = battery::random_class(8, 3, 2);
  EXPECT_LE(sup_deviation(cls, t, st), 2.0 * cls.M);
}

TEST(Rademacher, SingletonClosedForms) {
  const auto spec = iid_chain(Eigen::VectorXd::Constant(2, 0.5));
  const auto cls = make_class(row({0.6, 0.6}));
  EXPECT_NEAR(rademacher_complexity(cls, spec, 1, {}, true).value, 0.6, 1e-15);
  EXPECT_NEAR(rademacher_complexity(cls, spec, 2, {}, true).value, 0.3, 1e-15);
}

TEST(Rademacher, ExactMatchesBruteForce) {
  for (std::uint64_t s = 0; s < 6; ++s) {
    const auto spec = battery::random_chain(2 + static_cast<int>(s % 2), 40 + s);
    const auto cls = battery::random_class(3, static_cast<int>(spec.size()), 80 + s);
    for (std::size_t n : {1u, 3u, 5u})
      EXPECT_NEAR(rademacher_complexity(cls, spec, n, {}, true).value, brute_rademacher(cls, spec, n), 1e-12);
  }
}

TEST(Rademacher, MonteCarloWithinThreeStderr) {
  const auto spec = two_state_chain(0.2, 0.35);
  const auto cls = battery::random_class(3, 2, 5);
  const auto exact = rademacher_complexity(cls, spec, 6, {}, true);
  const auto mc = rademacher_complexity(cls, spec, 6, McOptions{10000, 42, 1, false});
  EXPECT_LT(std::abs(exact.value - mc.value), 3.0 * mc.stderr_);
  EXPECT_GT(mc.stderr_, 0.0);
  EXPECT_EQ(exact.stderr_, 0.0);
}

TEST(Rademacher, BoundedAndMonotoneUnderInclusion) {
  const auto spec = battery::random_chain(3, 15);
  const auto big = battery::random_class(4, 3, 8);
  FunctionClass small = make_class(big.values.topRows(2), big.M);
  const double rs = rademacher_complexity(small, spec, 5, {}, true).value;
  const double rb = rademacher_complexity(big, spec, 5, {}, true).value;
  EXPECT_LE(rs, rb);
  EXPECT_GE(rs, 0.0);
  EXPECT_LE(rb, big.M);
}

TEST(Rademacher, EnumerationCapEnforced) {
  const auto spec = battery::random_chain(4, 1);
  const auto cls = battery::random_class(1, 4, 1);
  try {
    rademacher_complexity(cls, spec, 9, {}, true);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ExactTooLarge);
  }
}

TEST(Rademacher, WorkerCountDoesNotChangeEstimate) {
  const auto spec = battery::random_chain(3, 19);
  const auto cls = battery::random_class(3, 3, 2);
  const auto a = rademacher_complexity(cls, spec, 20, McOptions{3000, 7, 1, false});
  const auto b = rademacher_complexity(cls, spec, 20, McOptions{3000, 7, 4, false});
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.stderr_, b.stderr_);
}

TEST(Gaussian, SingletonMeanAbsoluteNormal) {
  const auto spec = iid_chain(Eigen::VectorXd::Constant(2, 0.5));
  const auto g = gaussian_complexity(make_class(row({1.0, 1.0})), spec, 1, McOptions{20000, 3, 1, false});
  EXPECT_LT(std::abs(g.value - std::sqrt(2.0 / std::numbers::pi)), 3.0 * g.stderr_);
  const auto z = gaussian_complexity(make_class(row({0.0, 0.0})), spec, 4, McOptions{100, 3, 1, false});
  EXPECT_EQ(z.value, 0.0);
}

TEST(Gaussian, RademacherComparison) {
  for (std::uint64_t s = 0; s < 4; ++s) {
    const auto spec = battery::random_chain(3, 60 + s);
    const auto cls = battery::random_class(4, 3, 70 + s);
    const auto r = rademacher_complexity(cls, spec, 6, {}, true);
    const auto g = gaussian_complexity(cls, spec, 6, McOptions{10000, s, 1, false});
    EXPECT_LE(r.value, std::sqrt(std::numbers::pi / 2.0) * g.value + 3.0 * std::sqrt(std::numbers::pi / 2.0) * g.stderr_);
  }
}

TEST(MulticlassMargin, BinaryArithmetic) {
  FunctionClass cls = make_class(row({0.7, 0.2, 0.1, 0.1}));
  const auto m = multiclass_margin(cls, 2);
  EXPECT_NEAR(m.values(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(m.values(0, 1), -0.5, 1e-15);
  EXPECT_EQ(m.values(0, 2), 0.0);
  EXPECT_EQ(m.values(0, 3), 0.0);
  EXPECT_THROW(multiclass_margin(cls, 1), Error);
}

TEST(MulticlassMargin, ComplexityWithinTwoKMinusOne) {
  const std::size_t K = 3;
  const auto base = battery::random_chain(2, 31);
  Eigen::MatrixXd g = Eigen::MatrixXd::Constant(2, K, 1.0 / K);
  const auto lifted = lift_hmm(base, g);
  auto cls = battery::random_class(2, static_cast<int>(lifted.size()), 32);
  cls.labeled = true;
  cls.num_labels = K;
  const auto margins = multiclass_margin(cls, K);
  McOptions opt{10000, 5, 1, false};
  const auto rm = rademacher_complexity(margins, lifted, 8, opt);
  const auto rf = rademacher_complexity(cls, lifted, 8, opt);
  EXPECT_LE(rm.value, (2.0 * K - 1.0) * rf.value + 3.0 * (rm.stderr_ + (2.0 * K - 1.0) * rf.stderr_));
}

TEST(SignedMargin, LabelFlipNegates) {
  const auto cls = make_class(row({0.5, 0.5}));
  const auto m = signed_margin(cls, {-1.0, 1.0});
  EXPECT_EQ(m.values(0, 0), -0.5);
  EXPECT_EQ(m.values(0, 1), 0.5);
  const auto flip = signed_margin(cls, {1.0, -1.0});
  EXPECT_EQ((m.values + flip.values).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Truncate, ClampsAndIsIdempotent) {
  const auto cls = make_class(row({3.0, -3.0}));
  const auto t = truncate_class(cls, 1.0);
  EXPECT_EQ(t.values(0, 0), 1.0);
  EXPECT_EQ(t.values(0, 1), -1.0);
  EXPECT_EQ(t.M, 1.0);
  EXPECT_EQ(truncate_class(t, 1.0).values, t.values);
  EXPECT_EQ(truncate_class(cls, 5.0).values, cls.values);
}

TEST(Covering, IdenticalFunctions) {
  Trajectory t{2, {0, 1, 1}, 0};
  Eigen::MatrixXd v(3, 2);
  v << 0.2, 0.4, 0.2, 0.4, 0.2, 0.4;
  const auto c = covering_number(make_class(v), t, 0.01);
  EXPECT_EQ(c.greedy, 1u);
  EXPECT_EQ(c.entropy, 0.0);
}

TEST(Covering, ThresholdCase) {
  Trajectory t{2, {0, 1}, 0};
  Eigen::MatrixXd v(2, 2);
  v << 0.0, 0.0, 0.5, 0.5;  // distance 0.5
  EXPECT_EQ(covering_number(make_class(v), t, 0.6).greedy, 1u);
  EXPECT_EQ(covering_number(make_class(v), t, 0.4).greedy, 2u);
  EXPECT_NEAR(covering_number(make_class(v), t, 0.4).entropy, std::log(2.0), 1e-15);
}

TEST(Covering, GreedyNeverBeatsExact) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto cls = battery::random_class(10, 4, 500 + s);
    const auto t = sample_trajectory(battery::random_chain(4, s), 30, s);
    const auto c = covering_number(cls, t, 0.5);
    EXPECT_GE(c.greedy, c.exact);
    EXPECT_GE(c.exact, 1u);
  }
}

TEST(PnDistance, Pseudometric) {
  SplitMix64 rng(3);
  const auto t = sample_trajectory(battery::random_chain(5, 2), 40, 3);
  const Eigen::VectorXd w = occupation(t) / 40.0;
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd a(5), b(5), c(5);
    for (int x = 0; x < 5; ++x) {
      a(x) = rng.uniform();
      b(x) = rng.uniform();
      c(x) = rng.uniform();
    }
    EXPECT_NEAR(pn_distance(a, b, w), pn_distance(b, a, w), 1e-12);
    EXPECT_LE(pn_distance(a, c, w), pn_distance(a, b, w) + pn_distance(b, c, w) + 1e-12);
  }
}
