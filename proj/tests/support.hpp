#pragma once

// Oracles shared by the unit and acceptance tests. Each one is a direct
// transcription of the defining formula, written independently of the
// library code it checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "symtest/condsym.hpp"
#include "symtest/error.hpp"
#include "symtest/mmd.hpp"

namespace symtest::testing {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Asymptotic two-sided one-sample KS p-value against Uniform(lo, hi).
inline double ks_uniform_pvalue(std::vector<double> x, double lo = 0.0, double hi = 1.0) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double u = (x[i] - lo) / (hi - lo);
    d = std::max(d, std::max((i + 1) / n - u, u - i / n));
  }
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double q = 0.0;
  for (int k = 1; k <= 200; ++k) q += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(q, 0.0, 1.0);
}

/// Code of the symtest::Error raised by fn, if any.
template <class Fn>
std::optional<Errc> error_code(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline double rbf(const Vector& a, const Vector& b, double sigma) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) s += (a(k) - b(k)) * (a(k) - b(k));
  return std::exp(-s / (2.0 * sigma * sigma));
}

inline Vector row(const Matrix& X, Eigen::Index i) { return X.row(i).transpose(); }

/// Naive squared-MMD U-statistic.
inline double naive_mmd_u(const Matrix& X, const Matrix& Y, const std::function<double(const Vector&, const Vector&)>& k) {
  const auto n1 = X.rows(), n2 = Y.rows();
  double a = 0.0, b = 0.0, c = 0.0;
  for (Eigen::Index i = 0; i < n1; ++i)
    for (Eigen::Index j = 0; j < n1; ++j)
      if (i != j) a += k(row(X, i), row(X, j));
  for (Eigen::Index i = 0; i < n2; ++i)
    for (Eigen::Index j = 0; j < n2; ++j)
      if (i != j) b += k(row(Y, i), row(Y, j));
  for (Eigen::Index i = 0; i < n1; ++i)
    for (Eigen::Index j = 0; j < n2; ++j) c += k(row(X, i), row(Y, j));
  return a / (n1 * (n1 - 1.0)) + b / (n2 * (n2 - 1.0)) - 2.0 * c / (n1 * double(n2));
}

inline double naive_mmd_v(const Matrix& X, const Matrix& Y, const std::function<double(const Vector&, const Vector&)>& k) {
  const auto n1 = X.rows(), n2 = Y.rows();
  double a = 0.0, b = 0.0, c = 0.0;
  for (Eigen::Index i = 0; i < n1; ++i)
    for (Eigen::Index j = 0; j < n1; ++j) a += k(row(X, i), row(X, j));
  for (Eigen::Index i = 0; i < n2; ++i)
    for (Eigen::Index j = 0; j < n2; ++j) b += k(row(Y, i), row(Y, j));
  for (Eigen::Index i = 0; i < n1; ++i)
    for (Eigen::Index j = 0; j < n2; ++j) c += k(row(X, i), row(Y, j));
  return a / double(n1 * n1) + b / double(n2 * n2) - 2.0 * c / double(n1 * n2);
}

/// Direct transcription of the invariance statistic for fixed draws.
inline double naive_invariance(const Matrix& X, const symtest::TransformDraws& d, double sigma, bool u) {
  const auto n = X.rows();
  const int m = d.m();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (u && i == j) continue;
      const Vector xi = row(X, i), xj = row(X, j);
      double orbit = 0.0, cross = 0.0;
      for (int l = 0; l < m; ++l)
        for (int r = 0; r < m; ++r)
          orbit += rbf(symtest::act(d.G[l][i], xi), symtest::act(d.H[r][j], xj), sigma);
      for (int l = 0; l < m; ++l) cross += rbf(xi, symtest::act(d.G[l][j], xj), sigma);
      total += rbf(xi, xj, sigma) + orbit / (m * m) - 2.0 * cross / m;
    }
  return total / (u ? n * (n - 1.0) : double(n * n));
}

/// Dense transcription of the KCI statistic with an explicit inverse.
inline double naive_kci(const Matrix& kx, const Matrix& ky, const Matrix& km, double eps) {
  const auto n = kx.rows();
  const Matrix h = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / n);
  Matrix kxm(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) kxm(i, j) = kx(i, j) * km(i, j);
  const Matrix r = eps * (h * km * h + eps * Matrix::Identity(n, n)).inverse();
  const Matrix a = r * (h * kxm * h) * r;
  const Matrix b = r * (h * ky * h) * r;
  return (a * b).trace() / n;
}

inline Matrix gaussian_gram(const Matrix& A, double sigma) {
  Matrix g(A.rows(), A.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.rows(); ++j) g(i, j) = rbf(row(A, i), row(A, j), sigma);
  return g;
}

/// Joint density sum f(z, m) = sum_r k_Y(z, Z_r) k_M(m, M_r).
inline double joint_sum(const symtest::PairedDataset& d, const Vector& z, const Vector& m, double sy, double sm) {
  double s = 0.0;
  for (Eigen::Index r = 0; r < d.n(); ++r) s += rbf(z, row(d.Z, r), sy) * rbf(m, row(d.M, r), sm);
  return s;
}

/// ECDF of `s` evaluated at u.
inline double ecdf(const std::vector<double>& s, double u) {
  double c = 0.0;
  for (double v : s)
    if (v <= u) c += 1.0;
  return c / static_cast<double>(s.size());
}

/// KS distance between two samples by evaluating both ECDFs at every pooled point.
inline double grid_ks(const std::vector<double>& a, const std::vector<double>& b) {
  double best = 0.0;
  for (const auto* s : {&a, &b})
    for (double u : *s) best = std::max(best, std::abs(ecdf(a, u) - ecdf(b, u)));
  return best;
}

/// Discrete toy for the conditional-independence characterization.
/// X takes values {0, 1, 2, 3}; the two-element group swaps 0<->1 and 2<->3
/// on X and flips the binary response Y. M(x) = x / 2 labels the orbit, the
/// representative is the even state, and tau(x) is the flip exactly when x
/// is odd, so Z = Y xor (x odd).
struct DiscreteToy {
  std::array<double, 4> px{0.25, 0.25, 0.25, 0.25};
  std::array<double, 4> p_y1{};  // P(Y = 1 | X = x)

  /// Equivariant: P(Y = 1 | X = 1) = 1 - P(Y = 1 | X = 0), same for {2, 3}.
  static DiscreteToy equivariant() {
    DiscreteToy t;
    t.p_y1 = {0.9, 0.1, 0.3, 0.7};
    return t;
  }
  /// Not equivariant: X = 0 and X = 1 share the same response law.
  static DiscreteToy non_equivariant() {
    DiscreteToy t;
    t.p_y1 = {0.9, 0.9, 0.3, 0.7};
    return t;
  }

  static int orbit(int x) { return x / 2; }
  static int inverted(int x, int y) { return (x % 2) ? 1 - y : y; }

  /// Exact I(X; Z | M) in nats by enumerating the joint law.
  double conditional_mutual_information() const {
    std::map<std::array<int, 3>, double> joint;  // (m, x, z)
    for (int x = 0; x < 4; ++x)
      for (int y = 0; y < 2; ++y) {
        const double p = px[x] * (y ? p_y1[x] : 1.0 - p_y1[x]);
        joint[{orbit(x), x, inverted(x, y)}] += p;
      }
    double cmi = 0.0;
    for (const auto& [key, p] : joint) {
      if (p <= 0.0) continue;
      const int m = key[0], x = key[1], z = key[2];
      double pm = 0.0, pmx = 0.0, pmz = 0.0;
      for (const auto& [k2, q] : joint) {
        if (k2[0] != m) continue;
        pm += q;
        if (k2[1] == x) pmx += q;
        if (k2[2] == z) pmz += q;
      }
      cmi += p * std::log(p * pm / (pmx * pmz));
    }
    return cmi;
  }
};

}  // namespace symtest::testing
