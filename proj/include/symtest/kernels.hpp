#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "symtest/descriptor.hpp"
#include "symtest/error.hpp"

namespace symtest {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Anything callable on two points. Lets tests plug in ad-hoc kernels.
template <class K>
concept PointKernel = requires(const K& k, const Vector& a) {
  { k(a, a) } -> std::convertible_to<double>;
};

enum class KernelFamily { GaussianRBF, RotationSO3, DiscreteDelta };

namespace detail {

/// Fukumizu's characteristic kernel on SO(3), pi*t*(pi - t) / (8 sin t),
/// with t the angle of R2^T R1. Rotations are 9-vectors in row-major order.
/// The angle uses cos t = (tr - 1) / 2, the standard SO(3) trace identity.
inline double so3_kernel(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  const Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>> r1(a.data());
  const Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>> r2(b.data());
  const Eigen::Matrix3d m = r2.transpose() * r1;
  const double c = 0.5 * (m.trace() - 1.0);
  const Eigen::Vector3d skew(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
  const double s = 0.5 * skew.norm();
  const double theta = std::atan2(s, c);
  constexpr double pi = std::numbers::pi;
  if (theta < 1e-6) return pi / 8.0 * (pi - theta) * (1.0 + theta * theta / 6.0);
  const double phi = pi - theta;
  if (phi < 1e-6) return pi / 8.0 * theta * (1.0 + phi * phi / 6.0);
  return pi * theta * (pi - theta) / (8.0 * std::sin(theta));
}

inline void check_rotation9(const Eigen::Ref<const Vector>& v) {
  require(v.size() == 9, Errc::DimensionMismatch, "SO(3) kernel expects 9-component rotations");
  const Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>> r(v.data());
  const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  require(ortho <= 1e-8 && std::abs(r.determinant() - 1.0) <= 1e-8, Errc::InvalidRotation,
          "SO(3) kernel input is not a rotation");
}

}  // namespace detail

/// Positive-definite kernel family with its parameters.
struct KernelSpec {
  KernelFamily family = KernelFamily::GaussianRBF;
  double sigma = 1.0;
  bool median = false;  // bandwidth still to be resolved from training data

  static KernelSpec rbf(double sigma) {
    require(sigma > 0.0 && std::isfinite(sigma), Errc::BadParameters, "RBF bandwidth must be positive");
    return {KernelFamily::GaussianRBF, sigma, false};
  }
  static KernelSpec rbf_median() { return {KernelFamily::GaussianRBF, 1.0, true}; }
  static KernelSpec so3() { return {KernelFamily::RotationSO3, 1.0, false}; }
  static KernelSpec delta() { return {KernelFamily::DiscreteDelta, 1.0, false}; }

  /// `rbf(median)`, `rbf(1.5)`, `so3`, `delta`.
  static KernelSpec parse(std::string_view text) {
    const Descriptor d = parse_descriptor(text);
    if (d.name == "rbf" || d.name == "gaussian") {
      require(d.positional.size() == 1, Errc::InvalidDescriptor, "rbf needs one argument");
      if (detail::lower(d.positional[0]) == "median") return rbf_median();
      return rbf(parse_double(d.positional[0], "rbf bandwidth"));
    }
    if (d.name == "so3") return so3();
    if (d.name == "delta") return delta();
    throw Error(Errc::InvalidDescriptor, "unknown kernel '" + std::string(text) + "'");
  }

  std::string descriptor() const {
    switch (family) {
      case KernelFamily::GaussianRBF: {
        if (median) return "rbf(median)";
        char buf[64];
        std::snprintf(buf, sizeof buf, "rbf(%.17g)", sigma);
        return buf;
      }
      case KernelFamily::RotationSO3: return "so3";
      case KernelFamily::DiscreteDelta: return "delta";
    }
    return "unknown";
  }

  double operator()(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) const {
    require(x.size() == y.size(), Errc::DimensionMismatch, "kernel arguments differ in dimension");
    switch (family) {
      case KernelFamily::GaussianRBF:
        require(!median, Errc::BadParameters, "median bandwidth not resolved");
        return std::exp(-(x - y).squaredNorm() / (2.0 * sigma * sigma));
      case KernelFamily::RotationSO3:
        detail::check_rotation9(x);
        detail::check_rotation9(y);
        return detail::so3_kernel(x, y);
      case KernelFamily::DiscreteDelta: return x == y ? 1.0 : 0.0;
    }
    return 0.0;
  }

  /// log k(x, y); -infinity where the kernel vanishes.
  double log_eval(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) const {
    if (family == KernelFamily::GaussianRBF) {
      require(x.size() == y.size(), Errc::DimensionMismatch, "kernel arguments differ in dimension");
      require(!median, Errc::BadParameters, "median bandwidth not resolved");
      return -(x - y).squaredNorm() / (2.0 * sigma * sigma);
    }
    const double v = (*this)(x, y);
    return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
  }
};

inline double eval(const KernelSpec& k, const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
  return k(x, y);
}

/// Cross Gram matrix between the rows of A and the rows of B.
template <PointKernel K>
Matrix gram(const K& kernel, const Matrix& A, const Matrix& B) {
  require(A.cols() == B.cols(), Errc::DimensionMismatch, "Gram arguments differ in dimension");
  Matrix out(A.rows(), B.rows());
  for (Eigen::Index j = 0; j < B.rows(); ++j) {
    const Vector b = B.row(j).transpose();
    for (Eigen::Index i = 0; i < A.rows(); ++i) out(i, j) = kernel(A.row(i).transpose(), b);
  }
  return out;
}

inline Matrix gram(const KernelSpec& kernel, const Matrix& A, const Matrix& B) {
  require(A.cols() == B.cols(), Errc::DimensionMismatch, "Gram arguments differ in dimension");
  const Eigen::Index na = A.rows(), nb = B.rows(), d = A.cols();
  if (kernel.family == KernelFamily::GaussianRBF) {
    require(!kernel.median, Errc::BadParameters, "median bandwidth not resolved");
    const Matrix at = A.transpose();
    const Matrix bt = B.transpose();
    Matrix sq(na, nb);
    for (Eigen::Index j = 0; j < nb; ++j)
      for (Eigen::Index i = 0; i < na; ++i) {
        double s = 0.0;
        for (Eigen::Index k = 0; k < d; ++k) {
          const double diff = at(k, i) - bt(k, j);
          s += diff * diff;
        }
        sq(i, j) = s;
      }
    const double scale = -1.0 / (2.0 * kernel.sigma * kernel.sigma);
    return (sq.array() * scale).exp().matrix();
  }
  if (kernel.family == KernelFamily::RotationSO3) {
    for (Eigen::Index i = 0; i < na; ++i) detail::check_rotation9(A.row(i).transpose());
    for (Eigen::Index j = 0; j < nb; ++j) detail::check_rotation9(B.row(j).transpose());
    const Matrix at = A.transpose();
    const Matrix bt = B.transpose();
    Matrix out(na, nb);
    for (Eigen::Index j = 0; j < nb; ++j)
      for (Eigen::Index i = 0; i < na; ++i) out(i, j) = detail::so3_kernel(at.col(i), bt.col(j));
    return out;
  }
  Matrix out(na, nb);
  for (Eigen::Index j = 0; j < nb; ++j)
    for (Eigen::Index i = 0; i < na; ++i) out(i, j) = A.row(i) == B.row(j) ? 1.0 : 0.0;
  return out;
}

template <PointKernel K>
Matrix gram(const K& kernel, const Matrix& A) {
  return gram(kernel, A, A);
}

/// Median of the pairwise Euclidean distances between the rows of X.
inline double median_heuristic(const Matrix& X) {
  const Eigen::Index n = X.rows();
  require(n >= 2, Errc::SampleTooSmall, "median heuristic needs at least two points");
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) dist.push_back((X.row(i) - X.row(j)).norm());
  const std::size_t m = dist.size();
  const auto mid = dist.begin() + static_cast<std::ptrdiff_t>(m / 2);
  std::nth_element(dist.begin(), mid, dist.end());
  double med = *mid;
  if (m % 2 == 0) med = 0.5 * (med + *std::max_element(dist.begin(), mid));
  require(med > 0.0, Errc::AllPointsIdentical, "median pairwise distance is zero");
  return med;
}

/// Replaces a median-bandwidth placeholder using the given training points.
inline KernelSpec resolve_bandwidth(const KernelSpec& k, const Matrix& training) {
  if (k.family != KernelFamily::GaussianRBF || !k.median) return k;
  return KernelSpec::rbf(median_heuristic(training));
}

/// H K H with H = I - (1/n) 1 1^T, computed from row, column and grand means.
inline Matrix center(const Matrix& K) {
  require(K.rows() == K.cols(), Errc::DimensionMismatch, "centering needs a square matrix");
  const Vector row_mean = K.rowwise().mean();
  const Eigen::RowVectorXd col_mean = K.colwise().mean();
  const double grand = K.mean();
  Matrix out = K;
  out.colwise() -= row_mean;
  out.rowwise() -= col_mean;
  out.array() += grand;
  return out;
}

}  // namespace symtest
