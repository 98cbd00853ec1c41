#pragma once

// Tests for invariance of a distribution under a compact group: the
// conditional Monte Carlo test, its power estimate, the inversion-kernel
// variant, the transformation two-sample baseline and the Cramer-Wold test.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "symtest/error.hpp"
#include "symtest/groups.hpp"
#include "symtest/kernels.hpp"
#include "symtest/mmd.hpp"
#include "symtest/parallel.hpp"
#include "symtest/random.hpp"
#include "symtest/test_result.hpp"

namespace symtest {

enum class StatisticKind { MmdU, MmdNystrom, Cw };

inline StatisticKind parse_statistic_kind(std::string_view name) {
  const std::string s = detail::lower(detail::trim(name));
  if (s == "mmd" || s == "mmd-u") return StatisticKind::MmdU;
  if (s == "nmmd" || s == "mmd-nystrom" || s == "nystrom") return StatisticKind::MmdNystrom;
  if (s == "cw" || s == "cw-stat") return StatisticKind::Cw;
  throw Error(Errc::InvalidDescriptor, "unknown statistic '" + std::string(name) + "'");
}

inline std::string to_string(StatisticKind k) {
  switch (k) {
    case StatisticKind::MmdU: return "mmd";
    case StatisticKind::MmdNystrom: return "nmmd";
    case StatisticKind::Cw: return "cw";
  }
  return "unknown";
}

/// A test statistic that owns its auxiliary randomness: draw() produces the
/// retained draws, evaluate() is deterministic given them.
template <class S>
concept InvarianceStatistic = requires(const S& s, const Matrix& X, Rng& rng) {
  typename S::Draws;
  { s.draw(X, rng) } -> std::same_as<typename S::Draws>;
  { s.evaluate(X, s.draw(X, rng)) } -> std::convertible_to<double>;
};

template <PointKernel K>
struct MmdStatistic {
  using Draws = TransformDraws;
  GroupSpec spec;
  int m = 2;
  K kernel;

  Draws draw(const Matrix& X, Rng& rng) const {
    return draw_transforms(spec, X.rows(), static_cast<int>(X.cols()), m, rng);
  }
  double evaluate(const Matrix& X, const Draws& d) const { return invariance_statistic_u(X, d, kernel); }
};

template <PointKernel K>
struct NystromStatistic {
  using Draws = NystromDraws;
  GroupSpec spec;
  int m = 2;
  int J = 1;
  K kernel;
  bool full_landmarks = false;

  Draws draw(const Matrix& X, Rng& rng) const {
    return draw_nystrom(spec, X.rows(), static_cast<int>(X.cols()), m, J, rng, full_landmarks);
  }
  double evaluate(const Matrix& X, const Draws& d) const { return nystrom_statistic(X, d, kernel); }
};

/// Cramer-Wold: worst-case two-sample KS distance between projections of X
/// and of g_l X, where each g_l is shared by all observations.
struct CwDraws {
  std::vector<GroupElement> transforms;
  std::vector<Vector> directions;
};

inline std::vector<Vector> random_directions(int dim, int J, Rng& rng) {
  require(J >= 1, Errc::BadProjectionCount, "need at least one projection direction");
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(J));
  while (static_cast<int>(out.size()) < J) {
    Vector t(dim);
    for (int k = 0; k < dim; ++k) t(k) = standard_normal(rng);
    const double nrm = t.norm();
    if (nrm > 0.0) out.push_back(t / nrm);
  }
  return out;
}

/// sup_u |F_a(u) - F_b(u)| for two empirical distributions; exact via a
/// merged scan of the sorted samples.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), Errc::EmptySample, "KS distance needs non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < a.size() || j < b.size()) {
    double v;
    if (i == a.size()) v = b[j];
    else if (j == b.size()) v = a[i];
    else v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

inline double cw_statistic(const Matrix& X, const std::vector<GroupElement>& transforms,
                           const std::vector<Vector>& directions) {
  require(X.rows() >= 1, Errc::EmptySample, "CW statistic needs a sample");
  require(!transforms.empty(), Errc::EmptySample, "CW statistic needs at least one transform");
  require(!directions.empty(), Errc::BadProjectionCount, "CW statistic needs at least one direction");
  for (const auto& t : directions) {
    require(t.size() == X.cols(), Errc::DimensionMismatch, "direction dimension differs from data");
    require(std::abs(t.norm() - 1.0) <= 1e-9, Errc::BadParameters, "directions must be unit vectors");
  }
  const std::size_t n = static_cast<std::size_t>(X.rows());
  double best = 0.0;
  for (const auto& g : transforms) {
    Matrix gx(X.rows(), X.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i) gx.row(i) = act(g, X.row(i).transpose()).transpose();
    for (const auto& t : directions) {
      const Vector pa = X * t, pb = gx * t;
      best = std::max(best, ks_distance(std::vector<double>(pa.data(), pa.data() + n),
                                        std::vector<double>(pb.data(), pb.data() + n)));
    }
  }
  return best;
}

struct CwStatistic {
  using Draws = CwDraws;
  GroupSpec spec;
  int J = 1;
  int L = 2;

  Draws draw(const Matrix& X, Rng& rng) const {
    require(J >= 1, Errc::BadProjectionCount, "need at least one projection direction");
    require(L >= 1, Errc::BadParameters, "need at least one transform");
    Draws d;
    d.transforms = sample_haar(spec, rng, static_cast<std::size_t>(L), static_cast<int>(X.cols()));
    d.directions = random_directions(static_cast<int>(X.cols()), J, rng);
    return d;
  }
  double evaluate(const Matrix& X, const Draws& d) const { return cw_statistic(X, d.transforms, d.directions); }
};

struct McOptions {
  bool reuse_transforms = true;
  bool tie_break = false;  // randomized tie-breaking for discrete statistics
  double alpha = 0.05;
  int threads = 1;
};

/// Conditional Monte Carlo test. Each null iterate re-randomizes every
/// observation by an independent Haar element; the statistic's auxiliary
/// draws are retained across iterates unless reuse_transforms is false.
template <InvarianceStatistic S>
TestResult mc_test(const Matrix& X, const GroupSpec& spec, const S& stat, int B, Rng& rng,
                   const McOptions& opt = {}, std::string method = "mc") {
  require(X.rows() >= 2, Errc::SampleTooSmall, "Monte Carlo test needs n >= 2");
  require(B >= 1, Errc::BadMonteCarloBudget, "Monte Carlo budget B must be at least 1");
  require(spec.compact(), Errc::NonCompactGroup, "cannot sample Haar measure of " + spec.descriptor());
  const auto draws = stat.draw(X, rng);
  const double observed = stat.evaluate(X, draws);
  const std::uint64_t base = next_seed(rng);
  std::vector<double> null_stats(static_cast<std::size_t>(B));
  parallel_for(null_stats.size(), opt.threads, [&](std::size_t b) {
    Rng stream = derive_stream(base, b);
    const Matrix xb = transform_rows(spec, X, stream);
    null_stats[b] = opt.reuse_transforms ? stat.evaluate(xb, draws) : stat.evaluate(xb, stat.draw(xb, stream));
  });
  double p;
  if (opt.tie_break) {
    // Dufour: ties are ordered by independent uniforms.
    Rng tie_rng = derive_stream(base, static_cast<std::uint64_t>(B) + 1);
    const double u0 = uniform01(tie_rng);
    std::size_t count = 0;
    for (double t : null_stats) {
      const double u = uniform01(tie_rng);
      if (t > observed || (t == observed && u >= u0)) ++count;
    }
    p = static_cast<double>(1 + count) / static_cast<double>(1 + B);
  } else {
    p = monte_carlo_p_value(observed, null_stats);
  }
  return make_result(std::move(method), observed, p, std::move(null_stats), opt.alpha, base);
}

struct McConfig {
  int m = 2;
  int B = 200;
  StatisticKind statistic = StatisticKind::MmdU;
  int J = 0;  // Nystrom landmarks or CW directions; 0 means ceil(sqrt(n))
  int L = 2;  // CW transforms
  bool reuse_transforms = true;
  bool tie_break = false;
  double alpha = 0.05;
  int threads = 1;
};

inline int default_projection_count(Eigen::Index n) {
  return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
}

template <PointKernel K>
TestResult mc_invariance_test(const Matrix& X, const GroupSpec& spec, const K& kernel, const McConfig& cfg, Rng& rng) {
  const McOptions opt{cfg.reuse_transforms, cfg.tie_break, cfg.alpha, cfg.threads};
  const int J = cfg.J > 0 ? cfg.J : default_projection_count(X.rows());
  switch (cfg.statistic) {
    case StatisticKind::MmdU:
      return mc_test(X, spec, MmdStatistic<K>{spec, cfg.m, kernel}, cfg.B, rng, opt, "mmd");
    case StatisticKind::MmdNystrom:
      require(J <= X.rows(), Errc::BadLandmarkCount, "landmark count exceeds sample size");
      return mc_test(X, spec, NystromStatistic<K>{spec, cfg.m, J, kernel}, cfg.B, rng, opt, "nmmd");
    case StatisticKind::Cw:
      return mc_test(X, spec, CwStatistic{spec, J, cfg.L}, cfg.B, rng, opt, "cw");
  }
  throw Error(Errc::BadParameters, "unknown statistic");
}

template <PointKernel K>
TestResult mc_invariance_test(const Matrix& X, const GroupSpec& spec, int m, int B, StatisticKind statistic,
                              const K& kernel, Rng& rng, bool reuse_transforms = true) {
  McConfig cfg;
  cfg.m = m;
  cfg.B = B;
  cfg.statistic = statistic;
  cfg.reuse_transforms = reuse_transforms;
  return mc_invariance_test(X, spec, kernel, cfg, rng);
}

inline TestResult cw_test(const Matrix& X, const GroupSpec& spec, int J, int L, int B, Rng& rng,
                          const McOptions& opt = {}) {
  require(J >= 1, Errc::BadProjectionCount, "need at least one projection direction");
  return mc_test(X, spec, CwStatistic{spec, J, L}, B, rng, opt, "cw");
}

// ---------------------------------------------------------------------------
// Power

/// Probability that at most floor(alpha (B + 1) - 1) of B null statistics
/// reach the observed one, when each does so independently with prob. p0.
inline double conditional_power_binomial(double p0, int B, double alpha) {
  require(B >= 1, Errc::BadMonteCarloBudget, "B must be at least 1");
  require(p0 >= 0.0 && p0 <= 1.0, Errc::BadParameters, "p0 must lie in [0, 1]");
  const auto upper = static_cast<long>(std::floor(alpha * (B + 1) - 1.0 + 1e-9));
  if (upper < 0) return 0.0;
  if (upper >= B) return 1.0;
  if (p0 == 0.0) return 1.0;
  if (p0 == 1.0) return 0.0;
  const double lp = std::log(p0), lq = std::log1p(-p0);
  double sum = 0.0;
  for (long l = 0; l <= upper; ++l) {
    const double lchoose = std::lgamma(B + 1.0) - std::lgamma(l + 1.0) - std::lgamma(B - l + 1.0);
    sum += std::exp(lchoose + static_cast<double>(l) * lp + static_cast<double>(B - l) * lq);
  }
  return std::clamp(sum, 0.0, 1.0);
}

struct PowerEstimate {
  double beta_hat = 0.0;
  std::vector<double> betas;
  std::vector<double> p0;
  int m = 0;
  int B = 0;
  int C = 0;
  double alpha = 0.05;
};

/// Bootstrap power estimate around any test: `test(Xc, rng)` must return a
/// Monte Carlo TestResult with B null statistics.
template <class TestFn>
  requires std::invocable<TestFn&, const Matrix&, Rng&>
PowerEstimate power_estimate(const Matrix& X, int C, int B, double alpha, Rng& rng, TestFn&& test, int m = 0) {
  require(C >= 1, Errc::BadParameters, "need at least one bootstrap sample");
  require(B >= 1, Errc::BadMonteCarloBudget, "B must be at least 1");
  require(X.rows() >= 1, Errc::EmptySample, "power estimate needs data");
  PowerEstimate out;
  out.m = m;
  out.B = B;
  out.C = C;
  out.alpha = alpha;
  const auto n = static_cast<std::size_t>(X.rows());
  for (int c = 0; c < C; ++c) {
    Matrix xc(X.rows(), X.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i) xc.row(i) = X.row(static_cast<Eigen::Index>(uniform_index(rng, n)));
    const TestResult r = test(static_cast<const Matrix&>(xc), rng);
    const double p0 = std::clamp((r.p_value * (B + 1) - 1.0) / B, 0.0, 1.0);
    out.p0.push_back(p0);
    out.betas.push_back(conditional_power_binomial(p0, B, alpha));
  }
  double s = 0.0;
  for (double b : out.betas) s += b;
  out.beta_hat = s / C;
  return out;
}

template <PointKernel K>
PowerEstimate power_estimate(const Matrix& X, const GroupSpec& spec, const K& kernel, const McConfig& cfg, int C,
                             Rng& rng) {
  return power_estimate(
      X, C, cfg.B, cfg.alpha, rng,
      [&](const Matrix& xc, Rng& r) { return mc_invariance_test(xc, spec, kernel, cfg, r); }, cfg.m);
}

// ---------------------------------------------------------------------------
// Inversion-kernel test and transformation baseline

/// Flattened element for kernels on the group: rotations row-major,
/// permutations as their image array.
inline Vector element_features(const GroupElement& g) {
  if (g.is_permutation()) {
    const auto& img = g.image();
    Vector v(static_cast<Eigen::Index>(img.size()));
    for (std::size_t i = 0; i < img.size(); ++i) v(static_cast<Eigen::Index>(i)) = img[i];
    return v;
  }
  const Matrix m = g.as_matrix();
  Vector v(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) v(r * m.cols() + c) = m(r, c);
  return v;
}

inline Matrix element_feature_rows(const std::vector<GroupElement>& elements) {
  require(!elements.empty(), Errc::EmptySample, "no group elements");
  const Vector first = element_features(elements.front());
  Matrix out(static_cast<Eigen::Index>(elements.size()), first.size());
  for (std::size_t i = 0; i < elements.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = element_features(elements[i]).transpose();
  return out;
}

/// Compares inversion-kernel draws tau~(X_i) with fresh Haar elements by
/// two-sample MMD; null iterates left-multiply the draws by Haar elements.
template <PointKernel K>
TestResult inversion_mc_test(const Matrix& X, const GroupSpec& spec, int B, const K& group_kernel, Rng& rng,
                             double alpha = 0.05, int threads = 1) {
  require(spec.family != GroupFamily::Trivial, Errc::UnsupportedFamily,
          "trivial group has no nontrivial inversions");
  require(spec.compact(), Errc::NonCompactGroup, "cannot sample Haar measure of " + spec.descriptor());
  require(X.rows() >= 2, Errc::SampleTooSmall, "inversion test needs n >= 2");
  require(B >= 1, Errc::BadMonteCarloBudget, "Monte Carlo budget B must be at least 1");
  const auto n = static_cast<std::size_t>(X.rows());
  const int d = static_cast<int>(X.cols());
  std::vector<GroupElement> inv;
  inv.reserve(n);
  for (Eigen::Index i = 0; i < X.rows(); ++i) inv.push_back(inversion_kernel_sample(spec, X.row(i).transpose(), rng));
  const Matrix reference = element_feature_rows(sample_haar(spec, rng, n, d));
  const double observed = mmd_u(element_feature_rows(inv), reference, group_kernel).value;
  const std::uint64_t base = next_seed(rng);
  std::vector<double> null_stats(static_cast<std::size_t>(B));
  parallel_for(null_stats.size(), threads, [&](std::size_t b) {
    Rng stream = derive_stream(base, b);
    std::vector<GroupElement> moved;
    moved.reserve(n);
    for (const auto& t : inv) moved.push_back(compose(sample_haar_one(spec, stream, d), t));
    null_stats[b] = mmd_u(element_feature_rows(moved), reference, group_kernel).value;
  });
  const double p = monte_carlo_p_value(observed, null_stats);
  return make_result("inversion", observed, p, std::move(null_stats), alpha, base);
}

/// Two-sample MMD test between X and (g_1 X_1, ..., g_n X_n).
template <PointKernel K>
TestResult transformation_two_sample_test(const Matrix& X, const GroupSpec& spec, Rng& rng, const K& kernel, int B,
                                          double alpha = 0.05) {
  require(X.rows() >= 2, Errc::SampleTooSmall, "two-sample test needs n >= 2");
  const Matrix Y = transform_rows(spec, X, rng);
  return two_sample_mmd_test(X, Y, kernel, B, rng, alpha);
}

}  // namespace symtest
