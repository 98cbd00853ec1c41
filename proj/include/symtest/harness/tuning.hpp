#pragma once

// Bandwidth grid search: keep combinations whose H0 rejection rate is at
// most the cap and take the one with the highest H1 rate; if none passes,
// take the lowest H0 rate. Ties go to the earliest combination.

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "symtest/condsym.hpp"
#include "symtest/error.hpp"
#include "symtest/groups.hpp"
#include "symtest/kernels.hpp"
#include "symtest/parallel.hpp"
#include "symtest/random.hpp"
#include "symtest/synthdata.hpp"

namespace symtest {

struct TuningCandidate {
  std::vector<double> values;
  double h0_rate = 0.0;
  double h1_rate = 0.0;
};

struct TuningResult {
  std::size_t index = 0;
  std::vector<double> chosen;
  double h0_rate = 0.0;
  double h1_rate = 0.0;
  bool met_cap = false;
  std::vector<TuningCandidate> log;
};

inline TuningResult select_tuned(std::vector<TuningCandidate> log, double h0_cap = 0.1) {
  require(!log.empty(), Errc::EmptyGrid, "no tuning candidates");
  std::size_t best = log.size();
  for (std::size_t i = 0; i < log.size(); ++i)
    if (log[i].h0_rate <= h0_cap && (best == log.size() || log[i].h1_rate > log[best].h1_rate)) best = i;
  const bool met = best != log.size();
  if (!met) {
    best = 0;
    for (std::size_t i = 1; i < log.size(); ++i)
      if (log[i].h0_rate < log[best].h0_rate) best = i;
  }
  TuningResult r;
  r.index = best;
  r.chosen = log[best].values;
  r.h0_rate = log[best].h0_rate;
  r.h1_rate = log[best].h1_rate;
  r.met_cap = met;
  r.log = std::move(log);
  return r;
}

using RateEvaluator = std::function<std::pair<double, double>(const std::vector<double>&)>;

/// Exhaustive search over the Cartesian product of the grids; the last grid
/// varies fastest. `rates(values)` returns (H0 rate, H1 rate).
inline TuningResult tune_bandwidths(const std::vector<std::vector<double>>& grids, const RateEvaluator& rates,
                                    double h0_cap = 0.1) {
  require(!grids.empty(), Errc::EmptyGrid, "no grids given");
  for (const auto& g : grids) require(!g.empty(), Errc::EmptyGrid, "empty bandwidth grid");
  std::vector<TuningCandidate> log;
  std::vector<std::size_t> idx(grids.size(), 0);
  while (true) {
    TuningCandidate c;
    for (std::size_t k = 0; k < grids.size(); ++k) c.values.push_back(grids[k][idx[k]]);
    std::tie(c.h0_rate, c.h1_rate) = rates(c.values);
    log.push_back(std::move(c));
    std::size_t k = grids.size();
    while (k > 0) {
      --k;
      if (++idx[k] < grids[k].size()) break;
      idx[k] = 0;
      if (k == 0) return select_tuned(std::move(log), h0_cap);
    }
  }
}

enum class EquivarianceMethod { Kci, Cp };

/// Training protocol for the conditional tests. KCI grids are (x, y, m);
/// CP grids are (y, m).
struct EquivarianceTuning {
  EquivarianceMethod method = EquivarianceMethod::Kci;
  Generator h0;
  Generator h1;
  GroupSpec spec;
  bool act_on_y = true;
  InvariantKind invariant = InvariantKind::Norm;
  int n = 50;
  int sims = 100;
  double alpha = 0.05;
  double h0_cap = 0.1;
  KciConfig kci;
  CpConfig cp;
  std::vector<std::vector<double>> grids;
  std::uint64_t seed = 0;
  int threads = 1;
};

inline TuningResult tune_equivariance(const EquivarianceTuning& t) {
  require(t.sims >= 1, Errc::BadParameters, "need at least one training simulation");
  const std::size_t want = t.method == EquivarianceMethod::Kci ? 3 : 2;
  require(t.grids.size() == want, Errc::EmptyGrid,
          t.method == EquivarianceMethod::Kci ? "KCI tuning needs x, y and m grids" : "CP tuning needs y and m grids");
  // The same training datasets are reused for every grid point.
  auto make = [&](const Generator& g, std::uint64_t salt) {
    std::vector<PairedDataset> out(static_cast<std::size_t>(t.sims));
    parallel_for(out.size(), t.threads, [&](std::size_t s) {
      Rng rng = derive_stream(t.seed ^ salt, s);
      const Sample smp = sample(g, t.n, rng);
      out[s] = transform_responses(smp.X, smp.Y, t.spec, t.act_on_y, t.invariant);
    });
    return out;
  };
  const auto h0 = make(t.h0, 0x5A5A0000ULL);
  const auto h1 = make(t.h1, 0xA5A50000ULL);
  auto rate = [&](const std::vector<PairedDataset>& data, const std::vector<double>& v, std::uint64_t salt) {
    std::vector<char> rejected(data.size(), 0);
    parallel_for(data.size(), t.threads, [&](std::size_t s) {
      Rng rng = derive_stream(t.seed ^ salt, s);
      TestResult r;
      if (t.method == EquivarianceMethod::Kci) {
        KciConfig c = t.kci;
        c.kx = KernelSpec::rbf(v[0]);
        c.ky = KernelSpec::rbf(v[1]);
        c.km = KernelSpec::rbf(v[2]);
        r = kci_test(data[s], c, t.alpha, rng);
      } else {
        CpConfig c = t.cp;
        c.threads = 1;
        c.ky = KernelSpec::rbf(v[0]);
        c.km = KernelSpec::rbf(v[1]);
        r = cp_test(data[s], c, t.alpha, rng);
      }
      rejected[s] = r.reject ? 1 : 0;
    });
    double k = 0.0;
    for (char c : rejected) k += c;
    return k / static_cast<double>(data.size());
  };
  return tune_bandwidths(
      t.grids,
      [&](const std::vector<double>& v) {
        return std::make_pair(rate(h0, v, 0x0F0F0000ULL), rate(h1, v, 0xF0F00000ULL));
      },
      t.h0_cap);
}

}  // namespace symtest
