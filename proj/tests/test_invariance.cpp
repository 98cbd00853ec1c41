#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"
#include "symtest/invariance.hpp"
#include "symtest/stats.hpp"

using namespace symtest;
namespace st = symtest::testing;

namespace {

/// Statistic with no auxiliary draws that reads the first coordinate sum.
struct SumStatistic {
  struct Draws {};
  Draws draw(const Matrix&, Rng&) const { return {}; }
  double evaluate(const Matrix& X, const Draws&) const { return X.col(0).sum(); }
};

/// Constant statistic: every null iterate ties the observed value.
struct ConstantStatistic {
  struct Draws {};
  Draws draw(const Matrix&, Rng&) const { return {}; }
  double evaluate(const Matrix&, const Draws&) const { return 1.0; }
};

/// Binomial tail by explicit recursion on the pmf, independent of lgamma.
double binomial_tail_oracle(double p, int B, int upper) {
  if (upper < 0) return 0.0;
  double pmf = std::pow(1.0 - p, B), sum = 0.0;
  for (int l = 0; l <= upper && l <= B; ++l) {
    sum += pmf;
    pmf *= (B - l) / (l + 1.0) * p / (1.0 - p);
  }
  return sum;
}

Matrix rotation(double a) {
  Matrix r(2, 2);
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}

}  // namespace

TEST(MonteCarloPValue, FormulaCases) {
  EXPECT_DOUBLE_EQ(monte_carlo_p_value(5.0, {1.0, 2.0, 3.0, 4.0}), 1.0 / 5.0);
  EXPECT_DOUBLE_EQ(monte_carlo_p_value(0.0, {1.0, 2.0, 3.0, 4.0}), 1.0);
  EXPECT_DOUBLE_EQ(monte_carlo_p_value(2.0, {1.0, 2.0, 3.0, 4.0}), 4.0 / 5.0);  // ties count
  EXPECT_DOUBLE_EQ(monte_carlo_p_value(1.0, {}), 1.0);
}

TEST(MonteCarloPValue, MonotoneInObservedStatistic) {
  Rng rng(51);
  std::vector<double> null(49);
  for (auto& v : null) v = standard_normal(rng);
  double previous = 2.0;
  for (double t = -4.0; t <= 4.0; t += 0.05) {
    const double p = monte_carlo_p_value(t, null);
    EXPECT_LE(p, previous);
    previous = p;
  }
}

TEST(McTest, SeparatedStatisticGivesSmallestPValue) {
  Rng rng(52);
  Matrix X(10, 2);
  X.col(0).setOnes();  // any nontrivial rotation lowers the first-coordinate sum
  X.col(1).setZero();
  const TestResult r = mc_test(X, GroupSpec::so(2), SumStatistic{}, 30, rng);
  EXPECT_EQ(r.null_stats.size(), 30u);
  for (double t : r.null_stats) EXPECT_LT(t, r.statistic);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0 / 31.0);
  EXPECT_TRUE(r.reject);
}

TEST(McTest, AllTiesGivePValueOne) {
  Rng rng(53);
  const Matrix X = gaussian_matrix(rng, 10, 2);
  const TestResult r = mc_test(X, GroupSpec::so(2), ConstantStatistic{}, 19, rng);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0);
  EXPECT_FALSE(r.reject);
}

TEST(McTest, TieBreakingStaysOnLatticeAndSpreads) {
  std::vector<double> ps;
  for (int r = 0; r < 200; ++r) {
    Rng rng = derive_stream(54, static_cast<std::uint64_t>(r));
    const Matrix X = gaussian_matrix(rng, 6, 2);
    McOptions opt;
    opt.tie_break = true;
    ps.push_back(mc_test(X, GroupSpec::so(2), ConstantStatistic{}, 9, rng, opt).p_value);
  }
  EXPECT_TRUE(on_mc_lattice(ps, 9));
  // Randomized ranks make the p-value uniform on {0.1, ..., 1}.
  double below = 0;
  for (double p : ps) below += p <= 0.2 ? 1 : 0;
  EXPECT_NEAR(below / ps.size(), 0.2, 3 * std::sqrt(0.16 / ps.size()));
}

TEST(McTest, PreconditionsAreChecked) {
  Rng rng(55);
  const Matrix X = gaussian_matrix(rng, 10, 2);
  EXPECT_EQ(st::error_code([&] { (void)mc_test(X, GroupSpec::so(2), SumStatistic{}, 0, rng); }), Errc::BadMonteCarloBudget);
  EXPECT_EQ(st::error_code([&] { (void)mc_test(X.topRows(1), GroupSpec::so(2), SumStatistic{}, 5, rng); }),
            Errc::SampleTooSmall);
  EXPECT_EQ(st::error_code([&] { (void)mc_test(X, GroupSpec::lorentz(1), SumStatistic{}, 5, rng); }), Errc::NonCompactGroup);
}

TEST(McInvarianceTest, PValuesOnLatticeAndRejectMatchesAlpha) {
  Rng rng(56);
  std::vector<double> ps;
  for (int r = 0; r < 10; ++r) {
    const Matrix X = gaussian_matrix(rng, 20, 2);
    McConfig cfg;
    cfg.B = 19;
    cfg.alpha = 0.1;
    const TestResult res = mc_invariance_test(X, GroupSpec::so(2), KernelSpec::rbf(1.0), cfg, rng);
    EXPECT_EQ(res.reject, res.p_value <= 0.1);
    ps.push_back(res.p_value);
  }
  EXPECT_TRUE(on_mc_lattice(ps, 19));
}

TEST(McInvarianceTest, DeterministicForFixedSeed) {
  Rng data(57);
  const Matrix X = gaussian_matrix(data, 25, 3);
  for (auto kind : {StatisticKind::MmdU, StatisticKind::MmdNystrom, StatisticKind::Cw}) {
    McConfig cfg;
    cfg.B = 15;
    cfg.statistic = kind;
    Rng a(77), b(77);
    const TestResult ra = mc_invariance_test(X, GroupSpec::so(3), KernelSpec::rbf(1.0), cfg, a);
    const TestResult rb = mc_invariance_test(X, GroupSpec::so(3), KernelSpec::rbf(1.0), cfg, b);
    EXPECT_EQ(ra.statistic, rb.statistic);
    EXPECT_EQ(ra.null_stats, rb.null_stats);
    EXPECT_EQ(ra.p_value, rb.p_value);
    EXPECT_EQ(ra.seed, rb.seed);
  }
}

TEST(McInvarianceTest, ThreadCountDoesNotChangeResults) {
  Rng data(58);
  const Matrix X = gaussian_matrix(data, 30, 2);
  McConfig one;
  one.B = 24;
  McConfig many = one;
  many.threads = 3;
  Rng a(5), b(5);
  const TestResult ra = mc_invariance_test(X, GroupSpec::so(2), KernelSpec::rbf(1.0), one, a);
  const TestResult rb = mc_invariance_test(X, GroupSpec::so(2), KernelSpec::rbf(1.0), many, b);
  EXPECT_EQ(ra.null_stats, rb.null_stats);
  EXPECT_EQ(ra.p_value, rb.p_value);
}

TEST(McInvarianceTest, FreshDrawsModeRuns) {
  Rng rng(59);
  const Matrix X = gaussian_matrix(rng, 20, 2);
  const TestResult r = mc_invariance_test(X, GroupSpec::so(2), 2, 19, StatisticKind::MmdU, KernelSpec::rbf(1.0), rng,
                                          false);
  EXPECT_EQ(r.null_stats.size(), 19u);
  EXPECT_GT(r.p_value, 0.0);
}

TEST(McInvarianceTest, NystromLandmarksCheckedAgainstSampleSize) {
  Rng rng(60);
  McConfig cfg;
  cfg.statistic = StatisticKind::MmdNystrom;
  cfg.J = 30;
  EXPECT_THROW((void)mc_invariance_test(gaussian_matrix(rng, 10, 2), GroupSpec::so(2), KernelSpec::rbf(1.0), cfg, rng),
               Error);
}

TEST(McInvarianceTest, SizeOnSmallSo2Problem) {
  int rejections = 0;
  const int reps = 300;
  for (int r = 0; r < reps; ++r) {
    Rng rng = derive_stream(61, static_cast<std::uint64_t>(r));
    const Matrix X = gaussian_matrix(rng, 30, 2);
    McConfig cfg;
    cfg.B = 19;
    cfg.alpha = 0.05;
    if (mc_invariance_test(X, GroupSpec::so(2), KernelSpec::rbf(median_heuristic(X)), cfg, rng).reject) ++rejections;
  }
  // alpha (B + 1) = 1 is an integer, so the size is exactly 0.05.
  EXPECT_NEAR(rejections / double(reps), 0.05, 3.0 * std::sqrt(0.05 * 0.95 / reps));
}

TEST(McInvarianceTest, DetectsAShiftedMean) {
  Rng rng(62);
  Matrix X = gaussian_matrix(rng, 80, 2);
  X.col(0).array() += 2.0;
  McConfig cfg;
  cfg.B = 39;
  const TestResult r = mc_invariance_test(X, GroupSpec::so(2), KernelSpec::rbf(median_heuristic(X)), cfg, rng);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0 / 40.0);
}

TEST(ConditionalPower, Examples) {
  EXPECT_DOUBLE_EQ(conditional_power_binomial(0.5, 4, 0.2), 0.0625);
  EXPECT_DOUBLE_EQ(conditional_power_binomial(0.0, 99, 0.05), 1.0);
  EXPECT_DOUBLE_EQ(conditional_power_binomial(1.0, 99, 0.05), 0.0);
  EXPECT_DOUBLE_EQ(conditional_power_binomial(0.3, 10, 0.05), 0.0);  // floor(0.55 - 1) < 0
  EXPECT_THROW((void)conditional_power_binomial(0.3, 0, 0.05), Error);
  EXPECT_THROW((void)conditional_power_binomial(1.3, 10, 0.05), Error);
}

TEST(ConditionalPower, MatchesPmfRecursion) {
  for (int B : {19, 99, 199, 999})
    for (double alpha : {0.01, 0.05, 0.1})
      for (double p : {0.001, 0.01, 0.04, 0.05, 0.2, 0.7}) {
        const int upper = static_cast<int>(std::floor(alpha * (B + 1) - 1.0 + 1e-9));
        const double oracle = binomial_tail_oracle(p, B, upper);
        EXPECT_NEAR(conditional_power_binomial(p, B, alpha), oracle, 1e-12 + 1e-10 * oracle) << B << ' ' << alpha << ' ' << p;
      }
}

TEST(ConditionalPower, DecreasingInP0) {
  double prev = 1.0;
  for (double p = 0.0; p <= 1.0; p += 0.01) {
    const double v = conditional_power_binomial(p, 99, 0.05);
    EXPECT_LE(v, prev + 1e-15);
    EXPECT_GE(v, 0.0);
    prev = v;
  }
}

TEST(PowerEstimate, StubAtSmallestPValueGivesOne) {
  Rng rng(63);
  const Matrix X = gaussian_matrix(rng, 5, 2);
  const int B = 19;
  const PowerEstimate pe = power_estimate(X, 1, B, 0.05, rng, [&](const Matrix&, Rng&) {
    return make_result("stub", 1.0, 1.0 / (B + 1), std::vector<double>(B, 0.0), 0.05, 0);
  });
  ASSERT_EQ(pe.p0.size(), 1u);
  EXPECT_DOUBLE_EQ(pe.p0[0], 0.0);
  EXPECT_DOUBLE_EQ(pe.beta_hat, 1.0);
}

TEST(PowerEstimate, StubAtPValueOneGivesZero) {
  Rng rng(64);
  const Matrix X = gaussian_matrix(rng, 5, 2);
  const PowerEstimate pe = power_estimate(X, 1, 19, 0.05, rng, [](const Matrix&, Rng&) {
    return make_result("stub", 0.0, 1.0, std::vector<double>(19, 1.0), 0.05, 0);
  });
  EXPECT_DOUBLE_EQ(pe.p0[0], 1.0);
  EXPECT_DOUBLE_EQ(pe.beta_hat, 0.0);
}

TEST(PowerEstimate, BetaHatIsMeanOfBetas) {
  Rng rng(65);
  Matrix X = gaussian_matrix(rng, 40, 2);
  X.col(0).array() += 0.5;
  McConfig cfg;
  cfg.B = 19;
  const PowerEstimate pe = power_estimate(X, GroupSpec::so(2), KernelSpec::rbf(median_heuristic(X)), cfg, 6, rng);
  ASSERT_EQ(pe.betas.size(), 6u);
  double s = 0;
  for (double b : pe.betas) {
    EXPECT_GE(b, 0.0);
    EXPECT_LE(b, 1.0);
    s += b;
  }
  EXPECT_NEAR(pe.beta_hat, s / 6.0, 1e-15);
  EXPECT_EQ(pe.C, 6);
  EXPECT_EQ(pe.B, 19);
  EXPECT_THROW((void)power_estimate(X, GroupSpec::so(2), KernelSpec::rbf(1.0), cfg, 0, rng), Error);
}

TEST(CwStatistic, IdentityTransformGivesZero) {
  Rng rng(66);
  const Matrix X = gaussian_matrix(rng, 15, 3);
  const auto dirs = random_directions(3, 4, rng);
  EXPECT_EQ(cw_statistic(X, {GroupElement::rotation(Matrix::Identity(3, 3))}, dirs), 0.0);
}

TEST(CwStatistic, HalfTurnOnSinglePoint) {
  const Matrix X{{1.0, 0.0}};
  const Vector e1{{1.0, 0.0}};
  EXPECT_EQ(cw_statistic(X, {GroupElement::rotation(rotation(std::numbers::pi))}, {e1}), 1.0);
}

TEST(CwStatistic, MatchesGridOracle) {
  Rng rng(67);
  const int n = 20;
  const Matrix X = gaussian_matrix(rng, n, 3);
  const auto transforms = sample_haar(GroupSpec::so(3), rng, 2, 3);
  const auto dirs = random_directions(3, 5, rng);
  double oracle = 0.0;
  for (const auto& g : transforms)
    for (const auto& t : dirs) {
      std::vector<double> a, b;
      for (int i = 0; i < n; ++i) {
        a.push_back(st::row(X, i).dot(t));
        b.push_back(act(g, st::row(X, i)).dot(t));
      }
      oracle = std::max(oracle, st::grid_ks(a, b));
    }
  EXPECT_NEAR(cw_statistic(X, transforms, dirs), oracle, 1e-12);
}

TEST(CwStatistic, Preconditions) {
  const Matrix X{{1.0, 0.0}};
  const Vector e1{{1.0, 0.0}};
  const GroupElement id = GroupElement::rotation(Matrix::Identity(2, 2));
  EXPECT_THROW((void)cw_statistic(X, {}, {e1}), Error);
  EXPECT_THROW((void)cw_statistic(X, {id}, {}), Error);
  EXPECT_THROW((void)cw_statistic(X, {id}, {Vector{{2.0, 0.0}}}), Error);
}

TEST(KsDistance, AgreesWithGridOracleWithTies) {
  Rng rng(68);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> a, b;
    for (int i = 0; i < 12; ++i) a.push_back(std::round(3 * standard_normal(rng)));
    for (int i = 0; i < 9; ++i) b.push_back(std::round(3 * standard_normal(rng)));
    EXPECT_NEAR(ks_distance(a, b), st::grid_ks(a, b), 1e-15);
  }
}

TEST(CwTest, RejectsZeroDirections) {
  Rng rng(69);
  try {
    (void)cw_test(gaussian_matrix(rng, 10, 2), GroupSpec::so(2), 0, 2, 19, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::BadProjectionCount);
  }
}

TEST(CwTest, DefaultDirectionCount) {
  EXPECT_EQ(default_projection_count(200), 15);
  EXPECT_EQ(default_projection_count(100), 10);
  EXPECT_EQ(default_projection_count(1), 1);
}

TEST(InversionTest, TrivialGroupRefused) {
  Rng rng(70);
  try {
    (void)inversion_mc_test(gaussian_matrix(rng, 10, 2), GroupSpec::trivial(), 9, KernelSpec::rbf(1.0), rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnsupportedFamily);
  }
}

TEST(InversionTest, ZeroPointRefused) {
  Rng rng(71);
  Matrix X = gaussian_matrix(rng, 10, 3);
  X.row(4).setZero();
  try {
    (void)inversion_mc_test(X, GroupSpec::so(3), 9, KernelSpec::so3(), rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ZeroVector);
  }
}

TEST(InversionTest, ProducesLatticePValue) {
  Rng rng(72);
  const TestResult r = inversion_mc_test(gaussian_matrix(rng, 30, 3), GroupSpec::so(3), 19, KernelSpec::so3(), rng);
  EXPECT_TRUE(on_mc_lattice({r.p_value}, 19));
  EXPECT_EQ(r.method, "inversion");
}

TEST(TransformationTwoSample, TrivialGroupPoolsIdenticalSamples) {
  int rejections = 0;
  const int reps = 100;
  for (int r = 0; r < reps; ++r) {
    Rng rng = derive_stream(73, static_cast<std::uint64_t>(r));
    const Matrix X = gaussian_matrix(rng, 20, 2);
    if (transformation_two_sample_test(X, GroupSpec::trivial(), rng, KernelSpec::rbf(1.0), 19).reject) ++rejections;
  }
  EXPECT_LE(rejections / double(reps), 0.05 + 3.0 * std::sqrt(0.05 * 0.95 / reps));
}
