#pragma once

// Experiment configuration and the replication loop behind the CLI.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "symtest/condsym.hpp"
#include "symtest/error.hpp"
#include "symtest/groups.hpp"
#include "symtest/harness/csv.hpp"
#include "symtest/harness/preprocess.hpp"
#include "symtest/harness/report.hpp"
#include "symtest/harness/tuning.hpp"
#include "symtest/invariance.hpp"
#include "symtest/kernels.hpp"
#include "symtest/mmd.hpp"
#include "symtest/parallel.hpp"
#include "symtest/random.hpp"
#include "symtest/synthdata.hpp"

namespace symtest {

enum class Method { Mmd, Nmmd, Cw, TwoSampleMmd, Inversion, Kci, Cp };

inline Method parse_method(const std::string& s) {
  const std::string m = detail::lower(s);
  if (m == "mmd") return Method::Mmd;
  if (m == "nmmd") return Method::Nmmd;
  if (m == "cw") return Method::Cw;
  if (m == "2smmd") return Method::TwoSampleMmd;
  if (m == "inversion") return Method::Inversion;
  if (m == "kci") return Method::Kci;
  if (m == "cp") return Method::Cp;
  throw Error(Errc::ConfigInvalid, "unknown method '" + s + "'");
}

inline std::string to_string(Method m) {
  switch (m) {
    case Method::Mmd: return "mmd";
    case Method::Nmmd: return "nmmd";
    case Method::Cw: return "cw";
    case Method::TwoSampleMmd: return "2smmd";
    case Method::Inversion: return "inversion";
    case Method::Kci: return "kci";
    case Method::Cp: return "cp";
  }
  return "unknown";
}

inline bool is_equivariance(Method m) { return m == Method::Kci || m == Method::Cp; }

enum class Preprocess { None, Swarm, Dijet };

struct DatasetConfig {
  std::filesystem::path path;
  std::string columns;  // schema, see CsvSchema
  Preprocess preprocess = Preprocess::None;
  Eigen::Vector3d pole = Eigen::Vector3d::UnitZ();
};

struct TuningConfig {
  std::string h0;
  std::string h1;
  int sims = 100;
  double h0_cap = 0.1;
  std::vector<std::vector<double>> grids;
};

struct ExperimentConfig {
  Method method = Method::Mmd;
  std::string group = "so(2)";
  std::optional<std::string> generator;
  std::optional<DatasetConfig> dataset;
  int n = 100;
  int N = 1;
  int m = 2;
  int B = 200;
  int C = 50;
  int J = 0;
  int L = 2;
  int S = 50;
  double alpha = 0.05;
  std::string kernel = "rbf(median)";
  std::string kernel_x = "rbf(median)";
  std::string kernel_y = "rbf(median)";
  std::string kernel_m = "rbf(median)";
  double epsilon = 1e-3;
  std::string kci_null = "hadamard";
  bool act_on_y = true;
  std::optional<std::string> invariant;
  bool reuse_transforms = true;
  bool tie_break = false;
  double split = 0.5;
  std::uint64_t seed = 0;
  int threads = 1;
  bool timing = true;
  std::optional<TuningConfig> tuning;
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& what) { throw Error(Errc::ConfigInvalid, what); }

template <class T>
T json_get(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("bad value for '") + key + "': " + e.what());
  }
}

inline Preprocess parse_preprocess(const std::string& s) {
  const std::string p = lower(s);
  if (p == "none") return Preprocess::None;
  if (p == "swarm") return Preprocess::Swarm;
  if (p == "dijet") return Preprocess::Dijet;
  config_error("unknown preprocessing '" + s + "'");
}

inline std::string to_string(Preprocess p) {
  switch (p) {
    case Preprocess::None: return "none";
    case Preprocess::Swarm: return "swarm";
    case Preprocess::Dijet: return "dijet";
  }
  return "none";
}

}  // namespace detail

/// Parses and validates a JSON config. Relative dataset paths are resolved
/// against `base_dir`. Every descriptor is parsed once here so bad strings
/// surface as configuration errors.
inline ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  using detail::config_error;
  using detail::json_get;
  if (!j.is_object()) config_error("config must be a JSON object");
  static const std::set<std::string> known = {
      "method", "group", "generator", "dataset", "n", "N", "m", "B", "C", "J", "L", "S", "alpha", "kernel",
      "kernels", "epsilon", "kci_null", "act_on_y", "invariant", "reuse_transforms", "tie_break", "split", "seed",
      "threads", "timing", "tuning", "out", "format"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) config_error("unknown config key '" + key + "'");

  ExperimentConfig c;
  if (j.contains("method")) c.method = parse_method(json_get<std::string>(j, "method"));
  if (j.contains("group")) c.group = json_get<std::string>(j, "group");
  if (j.contains("generator")) c.generator = json_get<std::string>(j, "generator");
  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    if (!d.is_object() || !d.contains("path") || !d.contains("columns"))
      config_error("dataset needs 'path' and 'columns'");
    DatasetConfig dc;
    dc.path = json_get<std::string>(d, "path");
    if (dc.path.is_relative() && !base_dir.empty()) dc.path = base_dir / dc.path;
    dc.columns = json_get<std::string>(d, "columns");
    if (d.contains("preprocess")) dc.preprocess = detail::parse_preprocess(json_get<std::string>(d, "preprocess"));
    if (d.contains("pole")) {
      const auto p = json_get<std::vector<double>>(d, "pole");
      if (p.size() != 3) config_error("pole must have three components");
      dc.pole = Eigen::Vector3d(p[0], p[1], p[2]);
    }
    c.dataset = dc;
  }
  if (c.generator.has_value() == c.dataset.has_value()) config_error("give exactly one of 'generator' or 'dataset'");
  auto get_int = [&](const char* key, int& out) {
    if (j.contains(key)) out = json_get<int>(j, key);
  };
  get_int("n", c.n);
  get_int("N", c.N);
  get_int("m", c.m);
  get_int("B", c.B);
  get_int("C", c.C);
  get_int("J", c.J);
  get_int("L", c.L);
  get_int("S", c.S);
  get_int("threads", c.threads);
  if (j.contains("alpha")) c.alpha = json_get<double>(j, "alpha");
  if (j.contains("kernel")) c.kernel = json_get<std::string>(j, "kernel");
  if (j.contains("kernels")) {
    const auto& k = j.at("kernels");
    if (!k.is_object()) config_error("'kernels' must be an object with x, y, m");
    if (k.contains("x")) c.kernel_x = json_get<std::string>(k, "x");
    if (k.contains("y")) c.kernel_y = json_get<std::string>(k, "y");
    if (k.contains("m")) c.kernel_m = json_get<std::string>(k, "m");
  }
  if (j.contains("epsilon")) c.epsilon = json_get<double>(j, "epsilon");
  if (j.contains("kci_null")) c.kci_null = detail::lower(json_get<std::string>(j, "kci_null"));
  if (j.contains("act_on_y")) c.act_on_y = json_get<bool>(j, "act_on_y");
  if (j.contains("invariant")) c.invariant = json_get<std::string>(j, "invariant");
  if (j.contains("reuse_transforms")) c.reuse_transforms = json_get<bool>(j, "reuse_transforms");
  if (j.contains("tie_break")) c.tie_break = json_get<bool>(j, "tie_break");
  if (j.contains("split")) c.split = json_get<double>(j, "split");
  if (j.contains("timing")) c.timing = json_get<bool>(j, "timing");
  if (!j.contains("seed")) config_error("'seed' is required");
  c.seed = json_get<std::uint64_t>(j, "seed");
  if (j.contains("tuning")) {
    const auto& t = j.at("tuning");
    if (!t.is_object() || !t.contains("h0") || !t.contains("h1") || !t.contains("grid"))
      config_error("tuning needs 'h0', 'h1' and 'grid'");
    TuningConfig tc;
    tc.h0 = json_get<std::string>(t, "h0");
    tc.h1 = json_get<std::string>(t, "h1");
    if (t.contains("sims")) tc.sims = json_get<int>(t, "sims");
    if (t.contains("h0_cap")) tc.h0_cap = json_get<double>(t, "h0_cap");
    const auto& g = t.at("grid");
    const std::vector<std::string> keys =
        c.method == Method::Cp ? std::vector<std::string>{"y", "m"} : std::vector<std::string>{"x", "y", "m"};
    for (const auto& key : keys) {
      if (!g.contains(key)) config_error("tuning grid needs '" + key + "'");
      tc.grids.push_back(json_get<std::vector<double>>(g, key.c_str()));
    }
    if (tc.sims < 1) config_error("tuning.sims must be at least 1");
    c.tuning = tc;
  }

  if (c.n < 2) config_error("n must be at least 2");
  if (c.N < 1) config_error("N must be at least 1");
  if (c.m < 1) config_error("m must be at least 1");
  if (c.B < 1) config_error("B must be at least 1");
  if (c.C < 1) config_error("C must be at least 1");
  if (c.J < 0) config_error("J must be non-negative");
  if (c.L < 1) config_error("L must be at least 1");
  if (c.S < 1) config_error("S must be at least 1");
  if (c.threads < 1) config_error("threads must be at least 1");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) config_error("alpha must lie in (0, 1)");
  if (!(c.epsilon > 0.0)) config_error("epsilon must be positive");
  if (!(c.split > 0.0 && c.split < 1.0)) config_error("split must lie in (0, 1)");
  if (c.kci_null != "hadamard" && c.kci_null != "product") config_error("kci_null must be 'hadamard' or 'product'");
  try {
    (void)GroupSpec::parse(c.group);
    for (const auto* k : {&c.kernel, &c.kernel_x, &c.kernel_y, &c.kernel_m}) (void)KernelSpec::parse(*k);
    if (c.generator) (void)Generator::parse(*c.generator);
    if (c.tuning) {
      (void)Generator::parse(c.tuning->h0);
      (void)Generator::parse(c.tuning->h1);
    }
    if (c.invariant) (void)parse_invariant_kind(*c.invariant);
    if (c.dataset) (void)CsvSchema::parse(c.dataset->columns);
  } catch (const Error& e) {
    config_error(e.what());
  }
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path, const nlohmann::json& overrides = {}) {
  std::ifstream in(path);
  if (!in.good()) throw Error(Errc::ConfigInvalid, "cannot read config '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::ConfigInvalid, std::string("config is not valid JSON: ") + e.what());
  }
  if (overrides.is_object() && j.is_object())
    for (const auto& [k, v] : overrides.items()) j[k] = v;
  return parse_config(j, path.parent_path());
}

/// Configuration echo with a stable field order.
inline ordered_json to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["method"] = to_string(c.method);
  j["group"] = c.group;
  if (c.generator) j["generator"] = *c.generator;
  if (c.dataset) {
    ordered_json d;
    d["path"] = c.dataset->path.generic_string();
    d["columns"] = c.dataset->columns;
    d["preprocess"] = detail::to_string(c.dataset->preprocess);
    d["pole"] = {c.dataset->pole.x(), c.dataset->pole.y(), c.dataset->pole.z()};
    j["dataset"] = d;
  }
  j["n"] = c.n;
  j["N"] = c.N;
  j["m"] = c.m;
  j["B"] = c.B;
  j["C"] = c.C;
  j["J"] = c.J;
  j["L"] = c.L;
  j["S"] = c.S;
  j["alpha"] = c.alpha;
  if (is_equivariance(c.method)) {
    j["kernels"] = {{"x", c.kernel_x}, {"y", c.kernel_y}, {"m", c.kernel_m}};
    j["epsilon"] = c.epsilon;
    j["kci_null"] = c.kci_null;
    j["act_on_y"] = c.act_on_y;
    if (c.invariant) j["invariant"] = *c.invariant;
  } else {
    j["kernel"] = c.kernel;
    j["reuse_transforms"] = c.reuse_transforms;
    j["tie_break"] = c.tie_break;
  }
  j["split"] = c.split;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["timing"] = c.timing;
  if (c.tuning) {
    const std::vector<std::string> names =
        c.method == Method::Cp ? std::vector<std::string>{"y", "m"} : std::vector<std::string>{"x", "y", "m"};
    ordered_json t;
    t["h0"] = c.tuning->h0;
    t["h1"] = c.tuning->h1;
    t["sims"] = c.tuning->sims;
    t["h0_cap"] = c.tuning->h0_cap;
    ordered_json grid;
    for (std::size_t k = 0; k < names.size() && k < c.tuning->grids.size(); ++k) grid[names[k]] = c.tuning->grids[k];
    t["grid"] = grid;
    j["tuning"] = t;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Data sources

/// Loaded once per run; replications draw from it.
struct DataSource {
  std::optional<Generator> generator;
  Matrix X;
  Matrix Y;
};

inline DataSource load_source(const ExperimentConfig& c) {
  DataSource src;
  if (c.generator) {
    src.generator = Generator::parse(*c.generator);
    return src;
  }
  const DatasetConfig& d = *c.dataset;
  const CsvSchema schema = CsvSchema::parse(d.columns);
  const Dataset raw = ingest_csv(d.path, schema);
  switch (d.preprocess) {
    case Preprocess::None:
      src.X = raw.X;
      src.Y = raw.Y;
      break;
    case Preprocess::Swarm: {
      require(raw.Y.cols() >= 1, Errc::SchemaMismatch, "swarm preprocessing needs a response column");
      Matrix records(raw.X.rows(), raw.X.cols() + raw.Y.cols());
      records << raw.X, raw.Y;
      SwarmOptions opt;
      opt.pole = d.pole;
      const PairedDataset p = preprocess_swarm(records, opt);
      src.X = p.X;
      src.Y = p.Y;
      break;
    }
    case Preprocess::Dijet:
      src.X = preprocess_dijet(raw.X);
      src.Y = raw.Y;
      break;
  }
  require(src.X.rows() >= 1, Errc::SchemaMismatch, "dataset has no rows");
  return src;
}

struct Draw {
  Sample train;
  Sample test;
};

namespace detail {

inline Sample take(const DataSource& src, const std::vector<Eigen::Index>& idx) {
  Sample s;
  s.X.resize(static_cast<Eigen::Index>(idx.size()), src.X.cols());
  if (src.Y.size()) s.Y.resize(static_cast<Eigen::Index>(idx.size()), src.Y.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    s.X.row(static_cast<Eigen::Index>(k)) = src.X.row(idx[k]);
    if (src.Y.size()) s.Y.row(static_cast<Eigen::Index>(k)) = src.Y.row(idx[k]);
  }
  return s;
}

}  // namespace detail

/// Training and test samples for one replication. Generative sources draw
/// both fresh; datasets are shuffled, split, and sampled without replacement.
inline Draw draw_samples(const ExperimentConfig& c, const DataSource& src, Rng& rng) {
  Draw d;
  if (src.generator) {
    d.train = sample(*src.generator, c.n, rng);
    d.test = sample(*src.generator, c.n, rng);
    return d;
  }
  const auto rows = static_cast<std::size_t>(src.X.rows());
  std::vector<Eigen::Index> perm(rows);
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  for (std::size_t k = rows; k > 1; --k) std::swap(perm[k - 1], perm[uniform_index(rng, k)]);
  const auto n_train = static_cast<std::size_t>(std::floor(c.split * static_cast<double>(rows)));
  const std::size_t n_test = rows - n_train;
  const auto n = static_cast<std::size_t>(c.n);
  require(n_test >= n, Errc::SchemaMismatch,
          "dataset has " + std::to_string(n_test) + " test rows, fewer than n = " + std::to_string(c.n));
  require(n_train >= 2, Errc::SchemaMismatch, "training split needs at least two rows");
  const std::vector<Eigen::Index> train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(std::min(n, n_train)));
  const std::vector<Eigen::Index> test(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                                       perm.begin() + static_cast<std::ptrdiff_t>(n_train + n));
  d.train = detail::take(src, train);
  d.test = detail::take(src, test);
  return d;
}

// ---------------------------------------------------------------------------
// Running tests

inline InvariantKind invariant_for(const ExperimentConfig& c, const GroupSpec& spec) {
  return c.invariant ? parse_invariant_kind(*c.invariant) : default_invariant(spec);
}

inline KciConfig kci_config_for(const ExperimentConfig& c, const PairedDataset& train) {
  KciConfig k;
  k.kx = resolve_bandwidth(KernelSpec::parse(c.kernel_x), train.X);
  k.ky = resolve_bandwidth(KernelSpec::parse(c.kernel_y), train.Z);
  k.km = resolve_bandwidth(KernelSpec::parse(c.kernel_m), train.M);
  k.epsilon = c.epsilon;
  k.B = c.B;
  k.mode = c.kci_null == "product" ? KciNullMode::Product : KciNullMode::Hadamard;
  return k;
}

inline CpConfig cp_config_for(const ExperimentConfig& c, const PairedDataset& train) {
  CpConfig k;
  k.ky = resolve_bandwidth(KernelSpec::parse(c.kernel_y), train.Z);
  k.km = resolve_bandwidth(KernelSpec::parse(c.kernel_m), train.M);
  k.S = c.S;
  k.B = c.B;
  return k;
}

inline McConfig mc_config_for(const ExperimentConfig& c) {
  McConfig mc;
  mc.m = c.m;
  mc.B = c.B;
  mc.J = c.J;
  mc.L = c.L;
  mc.reuse_transforms = c.reuse_transforms;
  mc.tie_break = c.tie_break;
  mc.alpha = c.alpha;
  mc.statistic = c.method == Method::Nmmd ? StatisticKind::MmdNystrom
                 : c.method == Method::Cw ? StatisticKind::Cw
                                          : StatisticKind::MmdU;
  return mc;
}

/// One test on one draw.
inline TestResult run_test(const ExperimentConfig& c, const Draw& d, Rng& rng) {
  const GroupSpec spec = GroupSpec::parse(c.group);
  if (is_equivariance(c.method)) {
    require(d.test.Y.size() > 0, Errc::SchemaMismatch, "equivariance tests need response columns");
    const InvariantKind kind = invariant_for(c, spec);
    const PairedDataset train = transform_responses(d.train.X, d.train.Y, spec, c.act_on_y, kind);
    const PairedDataset test = transform_responses(d.test.X, d.test.Y, spec, c.act_on_y, kind);
    if (c.method == Method::Kci) return kci_test(test, kci_config_for(c, train), c.alpha, rng);
    return cp_test(test, cp_config_for(c, train), c.alpha, rng);
  }
  const KernelSpec kernel_spec = KernelSpec::parse(c.kernel);
  switch (c.method) {
    case Method::TwoSampleMmd:
      return transformation_two_sample_test(d.test.X, spec, rng, resolve_bandwidth(kernel_spec, d.train.X), c.B,
                                            c.alpha);
    case Method::Inversion: {
      require(spec.family != GroupFamily::Trivial, Errc::UnsupportedFamily,
              "the inversion test needs a non-trivial group");
      KernelSpec k = kernel_spec;
      if (k.family == KernelFamily::GaussianRBF && k.median) {
        std::vector<GroupElement> inv;
        for (Eigen::Index i = 0; i < d.train.X.rows(); ++i)
          inv.push_back(inversion_kernel_sample(spec, d.train.X.row(i).transpose(), rng));
        k = resolve_bandwidth(k, element_feature_rows(inv));
      }
      return inversion_mc_test(d.test.X, spec, c.B, k, rng, c.alpha);
    }
    default:
      return mc_invariance_test(d.test.X, spec, resolve_bandwidth(kernel_spec, d.train.X), mc_config_for(c), rng);
  }
}

struct ReplicationOutcome {
  TestResult result;
  double wall_time = 0.0;
};

inline ReplicationOutcome run_replication(const ExperimentConfig& c, const DataSource& src, std::size_t r) {
  Rng rng = derive_stream(c.seed, r);
  const auto start = std::chrono::steady_clock::now();
  const Draw d = draw_samples(c, src, rng);
  ReplicationOutcome out;
  out.result = run_test(c, d, rng);
  if (c.timing) out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

inline SimulationReport run_simulation(const ExperimentConfig& c) {
  const DataSource src = load_source(c);
  std::vector<double> p(static_cast<std::size_t>(c.N)), t(static_cast<std::size_t>(c.N));
  parallel_for(p.size(), c.threads, [&](std::size_t r) {
    const ReplicationOutcome o = run_replication(c, src, r);
    p[r] = o.result.p_value;
    t[r] = o.wall_time;
  });
  const bool mc_lattice = !is_equivariance(c.method) || c.method == Method::Cp;
  return make_report(std::move(p), std::move(t), c.alpha, to_json(c), mc_lattice ? c.B : 0);
}

inline ordered_json to_json(const TestResult& r) {
  ordered_json j;
  j["method"] = r.method;
  j["statistic"] = r.statistic;
  j["p_value"] = r.p_value;
  j["alpha"] = r.alpha;
  j["reject"] = r.reject;
  j["B"] = r.null_stats.size();
  j["stream_seed"] = r.seed;
  return j;
}

/// Bootstrap power estimate on the first replication's test sample.
inline PowerEstimate run_power(const ExperimentConfig& c) {
  require(!is_equivariance(c.method) && c.method != Method::TwoSampleMmd && c.method != Method::Inversion,
          Errc::ConfigInvalid, "power estimation supports the mmd, nmmd and cw methods");
  const DataSource src = load_source(c);
  Rng rng = derive_stream(c.seed, 0);
  const Draw d = draw_samples(c, src, rng);
  const GroupSpec spec = GroupSpec::parse(c.group);
  const KernelSpec k = resolve_bandwidth(KernelSpec::parse(c.kernel), d.train.X);
  return power_estimate(d.test.X, spec, k, mc_config_for(c), c.C, rng);
}

inline ordered_json to_json(const PowerEstimate& p) {
  ordered_json j;
  j["beta_hat"] = p.beta_hat;
  j["m"] = p.m;
  j["B"] = p.B;
  j["C"] = p.C;
  j["alpha"] = p.alpha;
  j["betas"] = p.betas;
  j["p0"] = p.p0;
  return j;
}

inline TuningResult run_tuning(const ExperimentConfig& c) {
  require(is_equivariance(c.method), Errc::ConfigInvalid, "tuning applies to the kci and cp methods");
  require(c.tuning.has_value(), Errc::ConfigInvalid, "config has no 'tuning' section");
  const GroupSpec spec = GroupSpec::parse(c.group);
  EquivarianceTuning t;
  t.method = c.method == Method::Kci ? EquivarianceMethod::Kci : EquivarianceMethod::Cp;
  t.h0 = Generator::parse(c.tuning->h0);
  t.h1 = Generator::parse(c.tuning->h1);
  t.spec = spec;
  t.act_on_y = c.act_on_y;
  t.invariant = invariant_for(c, spec);
  t.n = c.n;
  t.sims = c.tuning->sims;
  t.alpha = c.alpha;
  t.h0_cap = c.tuning->h0_cap;
  t.kci.epsilon = c.epsilon;
  t.kci.B = c.B;
  t.kci.mode = c.kci_null == "product" ? KciNullMode::Product : KciNullMode::Hadamard;
  t.cp.S = c.S;
  t.cp.B = c.B;
  t.grids = c.tuning->grids;
  t.seed = splitmix64(c.seed ^ 0x7475BE11ULL);
  t.threads = c.threads;
  return tune_equivariance(t);
}

inline ordered_json to_json(const TuningResult& r, Method method) {
  const std::vector<std::string> names =
      method == Method::Cp ? std::vector<std::string>{"y", "m"} : std::vector<std::string>{"x", "y", "m"};
  ordered_json j;
  ordered_json chosen;
  for (std::size_t k = 0; k < names.size() && k < r.chosen.size(); ++k) chosen[names[k]] = r.chosen[k];
  j["chosen"] = chosen;
  j["h0_rate"] = r.h0_rate;
  j["h1_rate"] = r.h1_rate;
  j["met_cap"] = r.met_cap;
  ordered_json log = ordered_json::array();
  for (const auto& cand : r.log) log.push_back({{"values", cand.values}, {"h0_rate", cand.h0_rate}, {"h1_rate", cand.h1_rate}});
  j["log"] = log;
  return j;
}

}  // namespace symtest
