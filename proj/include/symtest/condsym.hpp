#pragma once

// Tests for equivariance of a conditional distribution Y | X, recast as
// conditional independence of X and the inverted response tau(X)^-1 Y given
// a maximal invariant M(X): the KCI test and a conditional permutation test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "symtest/error.hpp"
#include "symtest/groups.hpp"
#include "symtest/kernels.hpp"
#include "symtest/parallel.hpp"
#include "symtest/random.hpp"
#include "symtest/test_result.hpp"

namespace symtest {

struct PairedDataset {
  Matrix X;
  Matrix Y;
  Matrix M;
  Matrix Z;

  Eigen::Index n() const { return X.rows(); }
};

inline void check_paired(const PairedDataset& d) {
  const Eigen::Index n = d.X.rows();
  require(d.Y.rows() == n && d.M.rows() == n && d.Z.rows() == n, Errc::DimensionMismatch,
          "X, Y, M and Z must have the same number of rows");
}

/// Z_i = tau(X_i)^-1 Y_i when the group also acts on Y, Z = Y otherwise;
/// M_i is the chosen maximal invariant of X_i.
inline PairedDataset transform_responses(const Matrix& X, const Matrix& Y, const GroupSpec& spec, bool act_on_y,
                                         InvariantKind kind) {
  require(X.rows() == Y.rows(), Errc::DimensionMismatch, "X and Y must have the same number of rows");
  PairedDataset d;
  d.X = X;
  d.Y = Y;
  d.Z = Y;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Vector x = X.row(i).transpose();
    const Vector m = maximal_invariant(spec, kind, x);
    if (i == 0) d.M.resize(X.rows(), m.size());
    d.M.row(i) = m.transpose();
    if (act_on_y) {
      require(Y.cols() == X.cols(), Errc::DimensionMismatch, "group acts on X and Y in the same dimension");
      const GroupElement tau = representative_inversion(spec, x);
      d.Z.row(i) = act(inverse(tau), Y.row(i).transpose()).transpose();
    }
  }
  return d;
}

inline PairedDataset transform_responses(const Matrix& X, const Matrix& Y, const GroupSpec& spec, bool act_on_y = true) {
  return transform_responses(X, Y, spec, act_on_y, default_invariant(spec));
}

// ---------------------------------------------------------------------------
// KCI

/// Null simulation. Hadamard draws (1/n) sum_k nu_k z_k^2 with nu the
/// eigenvalues of the entrywise product of the two conditioned matrices;
/// Product draws (1/n^2) sum_ij lambda_i mu_j z_ij^2, which treats the two
/// feature maps as independent.
enum class KciNullMode { Hadamard, Product };

struct KciConfig {
  KernelSpec kx = KernelSpec::rbf_median();
  KernelSpec ky = KernelSpec::rbf_median();
  KernelSpec km = KernelSpec::rbf_median();
  double epsilon = 1e-3;
  int B = 1000;
  KciNullMode mode = KciNullMode::Hadamard;
};

struct KciMatrices {
  Matrix kxm;  // R K_XM R, centered
  Matrix ky;   // R K_Y R, centered
};

inline KciMatrices kci_matrices(const PairedDataset& data, const KciConfig& cfg) {
  check_paired(data);
  const Eigen::Index n = data.n();
  require(n >= 3, Errc::SampleTooSmall, "KCI needs n >= 3");
  require(cfg.epsilon > 0.0, Errc::BadParameters, "KCI regularization must be positive");
  const Matrix km = gram(resolve_bandwidth(cfg.km, data.M), data.M);
  const Matrix kx = gram(resolve_bandwidth(cfg.kx, data.X), data.X);
  const Matrix ky = gram(resolve_bandwidth(cfg.ky, data.Z), data.Z);
  const Matrix kxm_c = center(kx.cwiseProduct(km));
  const Matrix ky_c = center(ky);
  Matrix reg = center(km);
  reg.diagonal().array() += cfg.epsilon;
  Eigen::LLT<Matrix> llt(reg);
  require(llt.info() == Eigen::Success, Errc::SingularSolve, "centered K_M + eps I is not positive definite");
  const Matrix r = cfg.epsilon * llt.solve(Matrix::Identity(n, n));
  require(r.allFinite(), Errc::SingularSolve, "regularized solve produced non-finite values");
  KciMatrices out;
  out.kxm = r * kxm_c * r;
  out.ky = r * ky_c * r;
  return out;
}

inline double kci_statistic(const KciMatrices& m) {
  return m.kxm.cwiseProduct(m.ky).sum() / static_cast<double>(m.kxm.rows());
}

inline double kci_statistic(const PairedDataset& data, const KciConfig& cfg) {
  return kci_statistic(kci_matrices(data, cfg));
}

namespace detail {

inline Vector retained_eigenvalues(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  Vector ev = eig.eigenvalues().cwiseMax(0.0);
  const double top = ev.size() ? ev.maxCoeff() : 0.0;
  std::vector<double> keep;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (top > 0.0 && ev(i) >= 1e-10 * top) keep.push_back(ev(i));
  return Eigen::Map<Vector>(keep.data(), static_cast<Eigen::Index>(keep.size()));
}

}  // namespace detail

inline std::vector<double> kci_null_samples(const KciMatrices& m, KciNullMode mode, Rng& rng, int B) {
  require(B >= 0, Errc::BadMonteCarloBudget, "null sample count must be non-negative");
  const double n = static_cast<double>(m.kxm.rows());
  std::vector<double> out(static_cast<std::size_t>(B), 0.0);
  if (mode == KciNullMode::Hadamard) {
    const Vector nu = detail::retained_eigenvalues(m.kxm.cwiseProduct(m.ky));
    for (auto& t : out) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < nu.size(); ++k) {
        const double z = standard_normal(rng);
        s += nu(k) * z * z;
      }
      t = s / n;
    }
    return out;
  }
  const Vector lambda = detail::retained_eigenvalues(m.kxm);
  const Vector mu = detail::retained_eigenvalues(m.ky);
  for (auto& t : out) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
      for (Eigen::Index j = 0; j < mu.size(); ++j) {
        const double z = standard_normal(rng);
        s += lambda(i) * mu(j) * z * z;
      }
    t = s / (n * n);
  }
  return out;
}

inline std::vector<double> kci_null_samples(const PairedDataset& data, const KciConfig& cfg, Rng& rng, int B) {
  return kci_null_samples(kci_matrices(data, cfg), cfg.mode, rng, B);
}

/// p = (1/B) #{T <= T_b}; B = 0 gives p = 1.
inline TestResult kci_test(const PairedDataset& data, const KciConfig& cfg, double alpha, Rng& rng) {
  const KciMatrices m = kci_matrices(data, cfg);
  const double t = kci_statistic(m);
  const std::uint64_t seed = next_seed(rng);
  Rng stream = derive_stream(seed, 0);
  std::vector<double> null_stats = kci_null_samples(m, cfg.mode, stream, cfg.B);
  double p = 1.0;
  if (cfg.B > 0) {
    std::size_t count = 0;
    for (double v : null_stats)
      if (t <= v) ++count;
    p = static_cast<double>(count) / static_cast<double>(cfg.B);
  }
  return make_result("kci", t, p, std::move(null_stats), alpha, seed);
}

inline TestResult kci_test(const Matrix& X, const Matrix& Y, const GroupSpec& spec, const KciConfig& cfg, double alpha,
                           Rng& rng, bool act_on_y = true) {
  return kci_test(transform_responses(X, Y, spec, act_on_y), cfg, alpha, rng);
}

// ---------------------------------------------------------------------------
// Conditional permutation test

struct CpConfig {
  KernelSpec ky = KernelSpec::rbf_median();
  KernelSpec km = KernelSpec::rbf_median();
  int S = 50;
  int B = 200;
  int threads = 1;
};

/// log A(a, i) = log sum_r k_Y(Z_a, Z_r) k_M(M_i, M_r): the unnormalized
/// log joint density of response Z_a placed at observation i.
inline Matrix kcde_log_table(const PairedDataset& data, const KernelSpec& ky, const KernelSpec& km) {
  check_paired(data);
  const Eigen::Index n = data.n();
  const KernelSpec kyr = resolve_bandwidth(ky, data.Z);
  const KernelSpec kmr = resolve_bandwidth(km, data.M);
  Matrix ly(n, n), lm(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index r = 0; r < n; ++r) {
      ly(a, r) = kyr.log_eval(data.Z.row(a).transpose(), data.Z.row(r).transpose());
      lm(a, r) = kmr.log_eval(data.M.row(a).transpose(), data.M.row(r).transpose());
    }
  constexpr double ninf = -std::numeric_limits<double>::infinity();
  Matrix out(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index i = 0; i < n; ++i) {
      double top = ninf;
      for (Eigen::Index r = 0; r < n; ++r) top = std::max(top, ly(a, r) + lm(i, r));
      if (top == ninf) {
        out(a, i) = ninf;
        continue;
      }
      double s = 0.0;
      for (Eigen::Index r = 0; r < n; ++r) s += std::exp(ly(a, r) + lm(i, r) - top);
      out(a, i) = top + std::log(s);
    }
  return out;
}

/// Log odds of swapping the responses currently at positions i and j;
/// perm[i] is the original index of the response now at i.
inline double kcde_swap_log_odds(const Matrix& log_table, Eigen::Index i, Eigen::Index j,
                                 const std::vector<Eigen::Index>& perm) {
  require(i != j, Errc::BadParameters, "swap needs two distinct indices");
  const Eigen::Index pi = perm[static_cast<std::size_t>(i)], pj = perm[static_cast<std::size_t>(j)];
  const double den = log_table(pi, i) + log_table(pj, j);
  require(std::isfinite(den), Errc::DegenerateDensity, "conditional density estimate vanishes");
  return log_table(pj, i) + log_table(pi, j) - den;
}

inline double kcde_swap_odds(const PairedDataset& data, const CpConfig& cfg, Eigen::Index i, Eigen::Index j,
                             const std::vector<Eigen::Index>& perm) {
  return std::exp(kcde_swap_log_odds(kcde_log_table(data, cfg.ky, cfg.km), i, j, perm));
}

namespace detail {

inline void cp_sweep(const Matrix& log_table, std::vector<Eigen::Index>& perm, Rng& rng) {
  const std::size_t n = perm.size();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  for (std::size_t k = n; k > 1; --k) std::swap(order[k - 1], order[uniform_index(rng, k)]);
  for (std::size_t k = 0; k + 1 < n; k += 2) {
    const Eigen::Index i = order[k], j = order[k + 1];
    const double lo = kcde_swap_log_odds(log_table, i, j, perm);
    const double accept = lo >= 0.0 ? 1.0 / (1.0 + std::exp(-lo)) : std::exp(lo) / (1.0 + std::exp(lo));
    if (uniform01(rng) < accept) std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
}

inline Matrix permute_rows(const Matrix& Z, const std::vector<Eigen::Index>& perm) {
  Matrix out(Z.rows(), Z.cols());
  for (std::size_t i = 0; i < perm.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = Z.row(perm[i]);
  return out;
}

}  // namespace detail

using CpStatistic = std::function<double(const Matrix& X, const Matrix& Z, const Matrix& M)>;

/// Runs `steps` sweeps of the swap chain starting from `perm`.
inline std::vector<Eigen::Index> cp_chain(const Matrix& log_table, std::vector<Eigen::Index> perm, int steps,
                                          Rng& rng) {
  for (int s = 0; s < steps; ++s) detail::cp_sweep(log_table, perm, rng);
  return perm;
}

inline TestResult cp_test(const PairedDataset& data, const CpConfig& cfg, const CpStatistic& statistic, double alpha,
                          Rng& rng) {
  check_paired(data);
  const Eigen::Index n = data.n();
  require(n >= 4, Errc::SampleTooSmall, "CP test needs n >= 4");
  require(cfg.S >= 1, Errc::BadParameters, "CP test needs S >= 1");
  require(cfg.B >= 0, Errc::BadMonteCarloBudget, "CP budget must be non-negative");
  const Matrix table = kcde_log_table(data, cfg.ky, cfg.km);
  const double observed = statistic(data.X, data.Z, data.M);
  std::vector<Eigen::Index> start(static_cast<std::size_t>(n));
  std::iota(start.begin(), start.end(), Eigen::Index{0});
  const std::uint64_t base = next_seed(rng);
  Rng burn = derive_stream(base, 0);
  start = cp_chain(table, std::move(start), cfg.S, burn);
  std::vector<double> null_stats(static_cast<std::size_t>(cfg.B));
  parallel_for(null_stats.size(), cfg.threads, [&](std::size_t b) {
    Rng stream = derive_stream(base, b + 1);
    const auto perm = cp_chain(table, start, cfg.S, stream);
    null_stats[b] = statistic(data.X, detail::permute_rows(data.Z, perm), data.M);
  });
  std::size_t count = 0;
  for (double t : null_stats)
    if (observed <= t) ++count;
  const double p = static_cast<double>(1 + count) / static_cast<double>(1 + cfg.B);
  return make_result("cp", observed, p, std::move(null_stats), alpha, base);
}

/// Multiple correlation R of the first principal coordinate of Z regressed
/// by least squares on an intercept and the columns of X. M is unused.
inline double multiple_correlation_statistic(const Matrix& X, const Matrix& Z, const Matrix& /*M*/ = Matrix()) {
  const Eigen::Index n = X.rows();
  require(Z.rows() == n, Errc::DimensionMismatch, "X and Z must have the same number of rows");
  require(n > X.cols() + 1, Errc::SampleTooSmall, "multiple correlation needs n > d_x + 1");
  const Matrix zc = Z.rowwise() - Z.colwise().mean();
  Vector y;
  if (Z.cols() == 1) {
    y = zc.col(0);
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(zc.transpose() * zc);
    y = zc * eig.eigenvectors().col(Z.cols() - 1);
  }
  Matrix design(n, X.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(X.cols()) = X;
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  qr.setThreshold(1e-10);
  require(qr.rank() == design.cols(), Errc::RankDeficientDesign, "regression design is rank deficient");
  const Vector resid = y - design * qr.solve(y);
  const double sst = (y.array() - y.mean()).square().sum();
  if (sst <= 0.0) return 0.0;
  const double r2 = std::clamp(1.0 - resid.squaredNorm() / sst, 0.0, 1.0);
  return std::sqrt(r2);
}

inline TestResult cp_test(const PairedDataset& data, const CpConfig& cfg, double alpha, Rng& rng) {
  return cp_test(data, cfg, [](const Matrix& x, const Matrix& z, const Matrix& m) {
    return multiple_correlation_statistic(x, z, m);
  }, alpha, rng);
}

inline TestResult cp_test(const Matrix& X, const Matrix& Y, const GroupSpec& spec, const CpConfig& cfg, double alpha,
                          Rng& rng, bool act_on_y = true) {
  return cp_test(transform_responses(X, Y, spec, act_on_y), cfg, alpha, rng);
}

}  // namespace symtest
