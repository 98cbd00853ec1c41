#pragma once

// Squared-MMD estimators: two-sample U/V statistics, the invariance statistic
// comparing a sample with its Monte Carlo orbit average, the shortcut valid
// for equivariant kernels, its Nystrom approximation, and the pooled
// bootstrap two-sample test.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "symtest/error.hpp"
#include "symtest/groups.hpp"
#include "symtest/kernels.hpp"
#include "symtest/random.hpp"
#include "symtest/test_result.hpp"

namespace symtest {

enum class MmdKind { U, V, Nystrom, EquivariantShortcut };

struct MmdEstimate {
  double value = 0.0;
  MmdKind kind = MmdKind::U;
  Eigen::Index n = 0;
  int m = 0;
};

/// Haar draws G[l][i] and H[r][i]: one element per (slot, observation).
struct TransformDraws {
  std::vector<std::vector<GroupElement>> G;
  std::vector<std::vector<GroupElement>> H;

  int m() const { return static_cast<int>(G.size()); }
};

inline TransformDraws draw_transforms(const GroupSpec& spec, Eigen::Index n, int dim, int m, Rng& rng) {
  require(m >= 1, Errc::BadParameters, "need at least one group draw per observation");
  require(spec.compact(), Errc::NonCompactGroup, "cannot sample Haar measure of " + spec.descriptor());
  TransformDraws draws;
  draws.G.resize(static_cast<std::size_t>(m));
  draws.H.resize(static_cast<std::size_t>(m));
  for (auto& slot : draws.G) slot = sample_haar(spec, rng, static_cast<std::size_t>(n), dim);
  for (auto& slot : draws.H) slot = sample_haar(spec, rng, static_cast<std::size_t>(n), dim);
  return draws;
}

/// Rows of the result are g_i X_i.
inline Matrix apply_each(const std::vector<GroupElement>& elements, const Matrix& X) {
  require(static_cast<Eigen::Index>(elements.size()) == X.rows(), Errc::DimensionMismatch,
          "one group element per observation required");
  Matrix out(X.rows(), X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    out.row(i) = act(elements[static_cast<std::size_t>(i)], X.row(i).transpose()).transpose();
  return out;
}

namespace detail {

inline double off_diagonal_sum(const Matrix& K) { return K.sum() - K.diagonal().sum(); }

struct OrbitSamples {
  std::vector<Matrix> gx;
  std::vector<Matrix> hx;
};

inline OrbitSamples orbit_samples(const Matrix& X, const TransformDraws& draws) {
  OrbitSamples s;
  for (const auto& slot : draws.G) s.gx.push_back(apply_each(slot, X));
  for (const auto& slot : draws.H) s.hx.push_back(apply_each(slot, X));
  return s;
}

/// Sum over (i, j) of the invariance summand; off-diagonal only when `u`.
template <PointKernel K>
double invariance_sum(const Matrix& X, const TransformDraws& draws, const K& kernel, bool u) {
  const OrbitSamples s = orbit_samples(X, draws);
  const double m = static_cast<double>(draws.m());
  auto total = [u](const Matrix& k) { return u ? off_diagonal_sum(k) : k.sum(); };
  double self = total(gram(kernel, X, X));
  double orbit = 0.0;
  for (const auto& gx : s.gx)
    for (const auto& hx : s.hx) orbit += total(gram(kernel, gx, hx));
  double cross = 0.0;
  for (const auto& gx : s.gx) cross += total(gram(kernel, X, gx));
  return self + orbit / (m * m) - 2.0 * cross / m;
}

}  // namespace detail

template <PointKernel K>
MmdEstimate mmd_u(const Matrix& X, const Matrix& Y, const K& kernel) {
  const Eigen::Index n1 = X.rows(), n2 = Y.rows();
  require(n1 >= 2 && n2 >= 2, Errc::SampleTooSmall, "U-statistic needs at least two points per sample");
  const double a = detail::off_diagonal_sum(gram(kernel, X, X)) / static_cast<double>(n1 * (n1 - 1));
  const double b = detail::off_diagonal_sum(gram(kernel, Y, Y)) / static_cast<double>(n2 * (n2 - 1));
  const double c = gram(kernel, X, Y).sum() / static_cast<double>(n1 * n2);
  return {a + b - 2.0 * c, MmdKind::U, n1, 0};
}

template <PointKernel K>
MmdEstimate mmd_v(const Matrix& X, const Matrix& Y, const K& kernel) {
  const Eigen::Index n1 = X.rows(), n2 = Y.rows();
  require(n1 >= 1 && n2 >= 1, Errc::EmptySample, "V-statistic needs non-empty samples");
  const double a = gram(kernel, X, X).sum() / static_cast<double>(n1 * n1);
  const double b = gram(kernel, Y, Y).sum() / static_cast<double>(n2 * n2);
  const double c = gram(kernel, X, Y).sum() / static_cast<double>(n1 * n2);
  return {a + b - 2.0 * c, MmdKind::V, n1, 0};
}

/// Unbiased invariance statistic for fixed draws; reused by the Monte Carlo test.
template <PointKernel K>
double invariance_statistic_u(const Matrix& X, const TransformDraws& draws, const K& kernel) {
  const Eigen::Index n = X.rows();
  require(n >= 2, Errc::SampleTooSmall, "invariance statistic needs n >= 2");
  return detail::invariance_sum(X, draws, kernel, true) / static_cast<double>(n * (n - 1));
}

/// Biased (V-form) invariance statistic, the quantity Nystrom approximates.
template <PointKernel K>
double invariance_statistic_v(const Matrix& X, const TransformDraws& draws, const K& kernel) {
  const Eigen::Index n = X.rows();
  require(n >= 1, Errc::EmptySample, "invariance statistic needs a sample");
  return detail::invariance_sum(X, draws, kernel, false) / static_cast<double>(n * n);
}

struct InvarianceEstimate {
  MmdEstimate estimate;
  TransformDraws draws;
};

template <PointKernel K>
InvarianceEstimate mmd_invariance_u(const Matrix& X, const GroupSpec& spec, int m, Rng& rng, const K& kernel) {
  require(X.rows() >= 2, Errc::SampleTooSmall, "invariance statistic needs n >= 2");
  TransformDraws draws = draw_transforms(spec, X.rows(), static_cast<int>(X.cols()), m, rng);
  const double value = invariance_statistic_u(X, draws, kernel);
  return {{value, MmdKind::U, X.rows(), m}, std::move(draws)};
}

/// Valid only when averaging the kernel over the group on either argument
/// gives the same function; uses the G draws alone.
template <PointKernel K>
double equivariant_shortcut_statistic(const Matrix& X, const TransformDraws& draws, const K& kernel) {
  const Eigen::Index n = X.rows();
  require(n >= 2, Errc::SampleTooSmall, "shortcut statistic needs n >= 2");
  double cross = 0.0;
  for (const auto& slot : draws.G) cross += detail::off_diagonal_sum(gram(kernel, X, apply_each(slot, X)));
  const double self = detail::off_diagonal_sum(gram(kernel, X, X));
  return (self - cross / static_cast<double>(draws.m())) / static_cast<double>(n * (n - 1));
}

template <PointKernel K>
MmdEstimate mmd_equivariant_shortcut(const Matrix& X, const GroupSpec& spec, int m, Rng& rng, const K& kernel) {
  require(X.rows() >= 2, Errc::SampleTooSmall, "shortcut statistic needs n >= 2");
  const TransformDraws draws = draw_transforms(spec, X.rows(), static_cast<int>(X.cols()), m, rng);
  return {equivariant_shortcut_statistic(X, draws, kernel), MmdKind::EquivariantShortcut, X.rows(), m};
}

// ---------------------------------------------------------------------------
// Nystrom

/// Group draws plus landmark row indices for the original sample and for
/// each transformed copy. Indices are reused when the sample is re-randomized.
struct NystromDraws {
  TransformDraws transforms;
  std::vector<Eigen::Index> landmarks;
  std::vector<std::vector<Eigen::Index>> landmarks_g;
  std::vector<std::vector<Eigen::Index>> landmarks_h;
};

inline NystromDraws draw_nystrom(const GroupSpec& spec, Eigen::Index n, int dim, int m, int J, Rng& rng,
                                 bool full_landmarks = false) {
  require(n >= 1, Errc::SampleTooSmall, "Nystrom statistic needs a sample");
  require(J >= 1 && J <= n, Errc::BadLandmarkCount, "landmark count must lie in [1, n]");
  NystromDraws d;
  d.transforms = draw_transforms(spec, n, dim, m, rng);
  auto pick = [&]() {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(full_landmarks ? n : J));
    for (std::size_t k = 0; k < idx.size(); ++k)
      idx[k] = full_landmarks ? static_cast<Eigen::Index>(k)
                              : static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(n)));
    return idx;
  };
  d.landmarks = pick();
  for (int l = 0; l < m; ++l) d.landmarks_g.push_back(pick());
  for (int r = 0; r < m; ++r) d.landmarks_h.push_back(pick());
  return d;
}

namespace detail {

/// Moore-Penrose inverse of a symmetric matrix, dropping singular values
/// below 1e-10 of the largest.
inline Matrix symmetric_pinv(const Matrix& A) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A);
  const Vector& ev = eig.eigenvalues();
  const double smax = ev.cwiseAbs().maxCoeff();
  Vector inv = Vector::Zero(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (smax > 0.0 && std::abs(ev(i)) >= 1e-10 * smax) inv(i) = 1.0 / ev(i);
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

inline Matrix take_rows(const Matrix& X, const std::vector<Eigen::Index>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), X.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = X.row(idx[k]);
  return out;
}

struct NystromFactor {
  Matrix landmarks;
  Vector psi;
};

template <PointKernel K>
NystromFactor nystrom_factor(const Matrix& source, const std::vector<Eigen::Index>& idx, const K& kernel) {
  NystromFactor f;
  f.landmarks = take_rows(source, idx);
  const Matrix ktt = gram(kernel, f.landmarks, f.landmarks);
  const Vector col_sums = gram(kernel, f.landmarks, source).rowwise().sum();
  f.psi = symmetric_pinv(ktt) * col_sums / static_cast<double>(source.rows());
  return f;
}

template <PointKernel K>
double nystrom_inner(const NystromFactor& a, const NystromFactor& b, const K& kernel) {
  return a.psi.dot(gram(kernel, a.landmarks, b.landmarks) * b.psi);
}

}  // namespace detail

template <PointKernel K>
double nystrom_statistic(const Matrix& X, const NystromDraws& draws, const K& kernel) {
  const auto& tr = draws.transforms;
  const int m = tr.m();
  const auto base = detail::nystrom_factor(X, draws.landmarks, kernel);
  std::vector<detail::NystromFactor> fg, fh;
  for (int l = 0; l < m; ++l)
    fg.push_back(detail::nystrom_factor(apply_each(tr.G[static_cast<std::size_t>(l)], X),
                                        draws.landmarks_g[static_cast<std::size_t>(l)], kernel));
  for (int r = 0; r < m; ++r)
    fh.push_back(detail::nystrom_factor(apply_each(tr.H[static_cast<std::size_t>(r)], X),
                                        draws.landmarks_h[static_cast<std::size_t>(r)], kernel));
  double orbit = 0.0;
  for (const auto& g : fg)
    for (const auto& h : fh) orbit += detail::nystrom_inner(g, h, kernel);
  double cross = 0.0;
  for (const auto& g : fg) cross += detail::nystrom_inner(base, g, kernel);
  const double md = static_cast<double>(m);
  return detail::nystrom_inner(base, base, kernel) + orbit / (md * md) - 2.0 * cross / md;
}

/// `full_landmarks` replaces the random landmarks by the whole sample, in
/// which case the value reproduces the V-form invariance statistic.
template <PointKernel K>
MmdEstimate mmd_nystrom(const Matrix& X, const GroupSpec& spec, int m, int J, Rng& rng, const K& kernel,
                        bool full_landmarks = false) {
  require(X.rows() >= 2, Errc::SampleTooSmall, "Nystrom statistic needs n >= 2");
  const NystromDraws draws = draw_nystrom(spec, X.rows(), static_cast<int>(X.cols()), m, J, rng, full_landmarks);
  return {nystrom_statistic(X, draws, kernel), MmdKind::Nystrom, X.rows(), m};
}

// ---------------------------------------------------------------------------
// Two-sample bootstrap test

namespace detail {

/// U-statistic read off a pooled Gram matrix for index multisets a and b.
inline double pooled_mmd_u(const Matrix& kz, const std::vector<Eigen::Index>& a, const std::vector<Eigen::Index>& b) {
  const double n1 = static_cast<double>(a.size()), n2 = static_cast<double>(b.size());
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (i != j) saa += kz(a[i], a[j]);
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      if (i != j) sbb += kz(b[i], b[j]);
  for (Eigen::Index i : a)
    for (Eigen::Index j : b) sab += kz(i, j);
  return saa / (n1 * (n1 - 1.0)) + sbb / (n2 * (n2 - 1.0)) - 2.0 * sab / (n1 * n2);
}

}  // namespace detail

/// Bootstrap two-sample MMD test: both pseudo-samples are drawn with
/// replacement from the pooled data. B = 0 gives p = 1.
template <PointKernel K>
TestResult two_sample_mmd_test(const Matrix& X, const Matrix& Y, const K& kernel, int B, Rng& rng,
                               double alpha = 0.05) {
  const Eigen::Index n1 = X.rows(), n2 = Y.rows();
  require(n1 >= 2 && n2 >= 2, Errc::SampleTooSmall, "two-sample test needs n >= 2 per sample");
  require(B >= 0, Errc::BadMonteCarloBudget, "bootstrap count must be non-negative");
  require(X.cols() == Y.cols(), Errc::DimensionMismatch, "samples differ in dimension");
  Matrix pooled(n1 + n2, X.cols());
  pooled << X, Y;
  const Matrix kz = gram(kernel, pooled, pooled);
  std::vector<Eigen::Index> a(static_cast<std::size_t>(n1)), b(static_cast<std::size_t>(n2));
  for (Eigen::Index i = 0; i < n1; ++i) a[static_cast<std::size_t>(i)] = i;
  for (Eigen::Index j = 0; j < n2; ++j) b[static_cast<std::size_t>(j)] = n1 + j;
  const double observed = detail::pooled_mmd_u(kz, a, b);
  const std::uint64_t base = next_seed(rng);
  std::vector<double> null_stats(static_cast<std::size_t>(B));
  const auto total = static_cast<std::size_t>(n1 + n2);
  for (int s = 0; s < B; ++s) {
    Rng stream = derive_stream(base, static_cast<std::uint64_t>(s));
    for (auto& v : a) v = static_cast<Eigen::Index>(uniform_index(stream, total));
    for (auto& v : b) v = static_cast<Eigen::Index>(uniform_index(stream, total));
    null_stats[static_cast<std::size_t>(s)] = detail::pooled_mmd_u(kz, a, b);
  }
  const double p = monte_carlo_p_value(observed, null_stats);
  return make_result("2sMmd", observed, p, std::move(null_stats), alpha, base);
}

}  // namespace symtest
