#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "symtest/error.hpp"

namespace symtest {

/// Upper tail of the asymptotic Kolmogorov distribution, Pr(K > lambda).
inline double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.3) {
    // The alternating series converges slowly here; use the dual form.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double cdf = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double t = (2.0 * k - 1.0);
      cdf += std::exp(-t * t * pi2 / (8.0 * lambda * lambda));
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool on_lattice = false;  // all values of the form (1 + k) / (1 + B)
};

/// One-sample KS test of the values against Uniform(0, 1).
inline KsResult ks_uniform(std::vector<double> values) {
  require(values.size() >= 5, Errc::TooFewValues, "uniformity check needs at least 5 values");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double u = std::clamp(values[i], 0.0, 1.0);
    d = std::max({d, static_cast<double>(i + 1) / n - u, u - static_cast<double>(i) / n});
  }
  KsResult r;
  r.statistic = d;
  r.p_value = kolmogorov_survival(std::sqrt(n) * d);
  return r;
}

/// Detects Monte Carlo p-values: every value equals (1 + k) / (1 + B).
inline bool on_mc_lattice(const std::vector<double>& values, int B) {
  if (B < 1) return false;
  for (double p : values) {
    const double k = p * (B + 1) - 1.0;
    if (std::abs(k - std::round(k)) > 1e-9 || k < -1e-9 || k > B + 1e-9) return false;
  }
  return true;
}

/// KS test of lattice p-values against the discrete uniform law on
/// {1/(B+1), ..., 1}. Both CDFs are step functions with jumps on the lattice,
/// so the supremum is attained at a lattice point or just below one. The
/// Kolmogorov tail is conservative for a discrete null.
inline KsResult ks_uniform_lattice(std::vector<double> values, int B) {
  require(values.size() >= 5, Errc::TooFewValues, "uniformity check needs at least 5 values");
  require(B >= 1, Errc::BadMonteCarloBudget, "lattice needs B >= 1");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  const double step = 1.0 / (B + 1);
  double d = 0.0;
  std::size_t below = 0;
  for (int k = 1; k <= B + 1; ++k) {
    const double u = k * step;
    while (below < values.size() && values[below] < u - 0.5 * step) ++below;
    std::size_t upto = below;
    while (upto < values.size() && values[upto] <= u + 0.5 * step) ++upto;
    d = std::max({d, std::abs(static_cast<double>(below) / n - (k - 1) * step),
                  std::abs(static_cast<double>(upto) / n - u)});
  }
  KsResult r;
  r.statistic = d;
  r.p_value = kolmogorov_survival(std::sqrt(n) * d);
  r.on_lattice = true;
  return r;
}

inline double binomial_se(double rate, std::size_t n) {
  return n ? std::sqrt(rate * (1.0 - rate) / static_cast<double>(n)) : 0.0;
}

}  // namespace symtest
