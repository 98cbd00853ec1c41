#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "support.hpp"
#include "symtest/groups.hpp"
#include "symtest/kernels.hpp"

using namespace symtest;
namespace st = symtest::testing;

namespace {

Vector flat(const Matrix& r) {
  Vector v(9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) v(3 * i + j) = r(i, j);
  return v;
}

/// Closed form pi theta (pi - theta) / (8 sin theta) with theta the angle of R2^T R1.
double so3_oracle(const Matrix& r1, const Matrix& r2) {
  const double c = std::clamp(((r2.transpose() * r1).trace() - 1.0) / 2.0, -1.0, 1.0);
  const double t = std::acos(c);
  const double pi = std::numbers::pi;
  return pi * t * (pi - t) / (8.0 * std::sin(t));
}

Matrix axis_rotation(double angle) {
  Matrix r = Matrix::Identity(3, 3);
  r(0, 0) = r(1, 1) = std::cos(angle);
  r(1, 0) = std::sin(angle);
  r(0, 1) = -std::sin(angle);
  return r;
}

}  // namespace

TEST(KernelSpec, ParsesDescriptors) {
  const KernelSpec med = KernelSpec::parse("rbf(median)");
  EXPECT_EQ(med.family, KernelFamily::GaussianRBF);
  EXPECT_TRUE(med.median);
  const KernelSpec fixed = KernelSpec::parse("rbf(1.5)");
  EXPECT_FALSE(fixed.median);
  EXPECT_DOUBLE_EQ(fixed.sigma, 1.5);
  EXPECT_EQ(KernelSpec::parse("so3").family, KernelFamily::RotationSO3);
  EXPECT_EQ(KernelSpec::parse("delta").family, KernelFamily::DiscreteDelta);
  for (const char* bad : {"rbf(-1)", "rbf(0)", "rbf()", "laplace", "rbf(abc)"}) EXPECT_THROW((void)KernelSpec::parse(bad), Error) << bad;
}

TEST(KernelSpec, DescriptorRoundTrips) {
  for (const char* text : {"rbf(median)", "rbf(1.5)", "so3", "delta"}) {
    const KernelSpec k = KernelSpec::parse(text);
    const KernelSpec back = KernelSpec::parse(k.descriptor());
    EXPECT_EQ(back.family, k.family);
    EXPECT_EQ(back.median, k.median);
    EXPECT_DOUBLE_EQ(back.sigma, k.sigma);
  }
}

TEST(Eval, GaussianExamples) {
  const KernelSpec k = KernelSpec::rbf(1.0);
  const Vector x{{0.2, -0.7}};
  EXPECT_DOUBLE_EQ(eval(KernelSpec::rbf(3.3), x, x), 1.0);
  const Vector y = x + Vector{{1.0, 1.0}};
  EXPECT_NEAR(eval(k, x, y), std::exp(-1.0), 1e-15);
  EXPECT_DOUBLE_EQ(eval(k, x, y), eval(k, y, x));
  EXPECT_THROW((void)eval(k, x, Vector::Zero(3)), Error);
  EXPECT_THROW((void)eval(KernelSpec::rbf_median(), x, y), Error);
}

TEST(Eval, So3LimitAtIdentity) {
  const Matrix r = axis_rotation(0.4);
  const double limit = std::numbers::pi * std::numbers::pi / 8.0;
  EXPECT_NEAR(eval(KernelSpec::so3(), flat(r), flat(r)), limit, 1e-12);
  EXPECT_NEAR(eval(KernelSpec::so3(), flat(r), flat(axis_rotation(0.4 + 1e-8))), limit, 1e-8);
}

TEST(Eval, So3MatchesClosedFormAndIsSymmetric) {
  Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    const Matrix a = haar_rotation(3, rng), b = haar_rotation(3, rng);
    const double v = eval(KernelSpec::so3(), flat(a), flat(b));
    EXPECT_NEAR(v, so3_oracle(a, b), 1e-9);
    EXPECT_NEAR(v, eval(KernelSpec::so3(), flat(b), flat(a)), 1e-12);
  }
}

TEST(Eval, So3NearHalfTurnIsFinite) {
  const double pi = std::numbers::pi;
  const double v = eval(KernelSpec::so3(), flat(axis_rotation(pi)), flat(Matrix::Identity(3, 3)));
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v, pi * pi / 8.0, 1e-6);
}

TEST(Eval, So3InvariantToLeftMultiplication) {
  Rng rng(22);
  for (int i = 0; i < 200; ++i) {
    const Matrix q = haar_rotation(3, rng), a = haar_rotation(3, rng), b = haar_rotation(3, rng);
    EXPECT_NEAR(eval(KernelSpec::so3(), flat(q * a), flat(q * b)), eval(KernelSpec::so3(), flat(a), flat(b)), 1e-9);
  }
}

TEST(Eval, So3RejectsNonRotations) {
  Vector bad = flat(Matrix::Identity(3, 3));
  bad(0) = 2.0;
  try {
    (void)eval(KernelSpec::so3(), bad, flat(Matrix::Identity(3, 3)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidRotation);
  }
}

TEST(Eval, DeltaIsIndicator) {
  EXPECT_EQ(eval(KernelSpec::delta(), Vector{{1.0}}, Vector{{1.0}}), 1.0);
  EXPECT_EQ(eval(KernelSpec::delta(), Vector{{1.0}}, Vector{{0.0}}), 0.0);
}

TEST(Gram, SmallExamples) {
  const KernelSpec k = KernelSpec::rbf(0.8);
  const Matrix one = Matrix::Constant(1, 3, 0.5);
  EXPECT_EQ(gram(k, one, one), Matrix::Ones(1, 1));
  const Matrix twin = Matrix::Constant(2, 3, -1.5);
  EXPECT_EQ(gram(k, twin, twin), Matrix::Ones(2, 2));
}

TEST(Gram, MatchesElementwiseLoop) {
  Rng rng(23);
  const Matrix X = gaussian_matrix(rng, 5, 3), Y = gaussian_matrix(rng, 4, 3);
  const KernelSpec k = KernelSpec::rbf(1.3);
  const Matrix g = gram(k, X, Y);
  ASSERT_EQ(g.rows(), 5);
  ASSERT_EQ(g.cols(), 4);
  for (Eigen::Index i = 0; i < 5; ++i)
    for (Eigen::Index j = 0; j < 4; ++j)
      EXPECT_NEAR(g(i, j), st::rbf(X.row(i).transpose(), Y.row(j).transpose(), 1.3), 1e-15);
  // The generic template path agrees with the specialized one.
  const auto lambda = [](const Vector& a, const Vector& b) { return st::rbf(a, b, 1.3); };
  EXPECT_LE((gram(lambda, X, Y) - g).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Gram, SymmetricAndPositiveDefinite) {
  Rng rng(24);
  for (int n : {2, 10, 50}) {
    const Matrix X = gaussian_matrix(rng, n, 3);
    const Matrix g = gram(KernelSpec::rbf(median_heuristic(X)), X);
    EXPECT_LE((g - g.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(g);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0) << n;
  }
}

TEST(MedianHeuristic, Examples) {
  EXPECT_DOUBLE_EQ(median_heuristic(Matrix{{0.0}, {2.0}}), 2.0);
  EXPECT_DOUBLE_EQ(median_heuristic(Matrix{{0.0}, {1.0}, {3.0}}), 2.0);
  EXPECT_DOUBLE_EQ(median_heuristic(Matrix{{0.0}, {1.0}, {3.0}, {7.0}}), 3.5);  // distances 1 2 3 4 6 7
  try {
    (void)median_heuristic(Matrix::Ones(4, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::AllPointsIdentical);
  }
  EXPECT_THROW((void)median_heuristic(Matrix::Ones(1, 2)), Error);
}

TEST(MedianHeuristic, MatchesSortOracle) {
  Rng rng(25);
  const Matrix X = gaussian_matrix(rng, 100, 4);
  std::vector<double> d;
  for (int i = 0; i < 100; ++i)
    for (int j = i + 1; j < 100; ++j) d.push_back((X.row(i) - X.row(j)).norm());
  std::sort(d.begin(), d.end());
  const double oracle = 0.5 * (d[d.size() / 2 - 1] + d[d.size() / 2]);  // 4950 pairs
  EXPECT_EQ(median_heuristic(X), oracle);
}

TEST(ResolveBandwidth, OnlyTouchesMedianPlaceholder) {
  const Matrix X{{0.0}, {2.0}};
  EXPECT_DOUBLE_EQ(resolve_bandwidth(KernelSpec::rbf_median(), X).sigma, 2.0);
  EXPECT_DOUBLE_EQ(resolve_bandwidth(KernelSpec::rbf(0.3), X).sigma, 0.3);
  EXPECT_EQ(resolve_bandwidth(KernelSpec::delta(), X).family, KernelFamily::DiscreteDelta);
}

TEST(Center, Examples) {
  EXPECT_LE(center(Matrix::Ones(4, 4)).cwiseAbs().maxCoeff(), 1e-15);
  Matrix expected(2, 2);
  expected << 0.5, -0.5, -0.5, 0.5;
  EXPECT_LE((center(Matrix::Identity(2, 2)) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Center, RowSumsVanishAndIdempotent) {
  Rng rng(26);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix a = gaussian_matrix(rng, 7, 7);
    const Matrix c = center(a);
    EXPECT_LE(c.rowwise().sum().cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE(c.colwise().sum().cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((center(c) - c).cwiseAbs().maxCoeff(), 1e-9);
    const Matrix h = Matrix::Identity(7, 7) - Matrix::Constant(7, 7, 1.0 / 7.0);
    EXPECT_LE((c - h * a * h).cwiseAbs().maxCoeff(), 1e-12);
  }
}
