// symtest command-line driver.

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "symtest/symtest.hpp"

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfigError = 2, kDataError = 3 };

int exit_code_for(symtest::Errc code) {
  using symtest::Errc;
  switch (code) {
    case Errc::DataFileMissing:
    case Errc::SchemaMismatch:
    case Errc::ParseError:
    case Errc::RangeError:
    case Errc::DegenerateVariance:
    case Errc::IoError:
    case Errc::ZeroVector:
    case Errc::AllPointsIdentical:
    case Errc::DimensionMismatch:
      return kDataError;
    case Errc::ConfigInvalid:
    case Errc::InvalidDescriptor:
    case Errc::BadParameters:
    case Errc::UnsupportedFamily:
    case Errc::UnsupportedKind:
    case Errc::NonCompactGroup:
    case Errc::BadLandmarkCount:
    case Errc::BadMonteCarloBudget:
    case Errc::BadProjectionCount:
    case Errc::EmptyGrid:
      return kConfigError;
    default:
      return kFailure;
  }
}

struct Flags {
  std::string config;
  std::string out;
  std::string format;
  std::optional<int> n, N, B, m, threads;
  std::optional<double> alpha;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> group, kernel;
  bool no_timing = false;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON experiment config")->required();
  cmd->add_option("--out", f.out, "output path (stdout when omitted)");
  cmd->add_option("--format", f.format, "report format: json or csv")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--n", f.n, "sample size");
  cmd->add_option("--N", f.N, "replications");
  cmd->add_option("--B", f.B, "Monte Carlo iterations");
  cmd->add_option("--m", f.m, "transforms per observation");
  cmd->add_option("--alpha", f.alpha, "significance level");
  cmd->add_option("--seed", f.seed, "base seed");
  cmd->add_option("--group", f.group, "group descriptor, e.g. so(4)");
  cmd->add_option("--kernel", f.kernel, "kernel descriptor, e.g. rbf(median)");
  cmd->add_option("--threads", f.threads, "worker threads");
  cmd->add_flag("--no-timing", f.no_timing, "record zero wall times for byte-stable reports");
}

nlohmann::json overrides_from(const Flags& f) {
  nlohmann::json j = nlohmann::json::object();
  if (f.n) j["n"] = *f.n;
  if (f.N) j["N"] = *f.N;
  if (f.B) j["B"] = *f.B;
  if (f.m) j["m"] = *f.m;
  if (f.alpha) j["alpha"] = *f.alpha;
  if (f.seed) j["seed"] = *f.seed;
  if (f.group) j["group"] = *f.group;
  if (f.kernel) j["kernel"] = *f.kernel;
  if (f.threads) j["threads"] = *f.threads;
  if (f.no_timing) j["timing"] = false;
  return j;
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in.good()) throw symtest::Error(symtest::Errc::ConfigInvalid, "cannot read config '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw symtest::Error(symtest::Errc::ConfigInvalid, std::string("config is not valid JSON: ") + e.what());
  }
}

struct Loaded {
  symtest::ExperimentConfig config;
  std::string out;
  std::string format;
};

Loaded load(const Flags& f, const char* default_method) {
  nlohmann::json j = read_json(f.config);
  if (!j.is_object()) throw symtest::Error(symtest::Errc::ConfigInvalid, "config must be a JSON object");
  const nlohmann::json overrides = overrides_from(f);
  for (const auto& [k, v] : overrides.items()) j[k] = v;
  if (!j.contains("method")) j["method"] = default_method;
  Loaded l;
  l.out = f.out;
  if (l.out.empty() && j.contains("out") && j["out"].is_string()) l.out = j["out"].get<std::string>();
  l.format = f.format;
  if (l.format.empty() && j.contains("format") && j["format"].is_string()) l.format = j["format"].get<std::string>();
  l.config = symtest::parse_config(j, std::filesystem::path(f.config).parent_path());
  return l;
}

void write_text(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(out, std::ios::binary | std::ios::trunc);
  symtest::require(file.good(), symtest::Errc::IoError, "cannot open '" + out + "' for writing");
  file << text;
  file.flush();
  symtest::require(file.good(), symtest::Errc::IoError, "failed writing '" + out + "'");
}

int run_single(const Flags& f, bool equivariance) {
  const Loaded l = load(f, equivariance ? "kci" : "mmd");
  const auto& c = l.config;
  if (symtest::is_equivariance(c.method) != equivariance)
    throw symtest::Error(symtest::Errc::ConfigInvalid, "method '" + symtest::to_string(c.method) + "' does not belong to the " +
                                                           (equivariance ? "equivariance" : "invariance") + " subcommand");
  const symtest::DataSource src = symtest::load_source(c);
  const symtest::ReplicationOutcome o = symtest::run_replication(c, src, 0);
  symtest::ordered_json j;
  j["version"] = symtest::kVersion;
  j["result"] = symtest::to_json(o.result);
  j["config"] = symtest::to_json(c);
  write_text(j.dump(2) + "\n", l.out);
  return kOk;
}

int run_simulate(const Flags& f) {
  const Loaded l = load(f, "mmd");
  const symtest::SimulationReport report = symtest::run_simulation(l.config);
  symtest::ReportFormat format = symtest::ReportFormat::Json;
  if (!l.format.empty())
    format = l.format == "csv" ? symtest::ReportFormat::Csv : symtest::ReportFormat::Json;
  else if (!l.out.empty())
    format = symtest::report_format_for(l.out);
  if (l.out.empty())
    std::cout << symtest::render_report(report, format);
  else
    symtest::emit_report(report, l.out, format);
  std::cerr << "rejection rate " << report.rejection_rate << " (se " << report.standard_error << ") over "
            << report.p_values.size() << " replications\n";
  return kOk;
}

int run_power(const Flags& f) {
  const Loaded l = load(f, "mmd");
  const symtest::PowerEstimate p = symtest::run_power(l.config);
  symtest::ordered_json j;
  j["version"] = symtest::kVersion;
  j["power"] = symtest::to_json(p);
  j["config"] = symtest::to_json(l.config);
  write_text(j.dump(2) + "\n", l.out);
  return kOk;
}

int run_tune(const Flags& f) {
  const Loaded l = load(f, "kci");
  const symtest::TuningResult r = symtest::run_tuning(l.config);
  symtest::ordered_json j;
  j["version"] = symtest::kVersion;
  j["tuning"] = symtest::to_json(r, l.config.method);
  j["config"] = symtest::to_json(l.config);
  write_text(j.dump(2) + "\n", l.out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo tests for distributional symmetry"};
  app.set_version_flag("--version", std::string(symtest::kVersion));
  app.require_subcommand(1);
  Flags flags;
  auto* inv = app.add_subcommand("invariance", "run one invariance test");
  auto* eqv = app.add_subcommand("equivariance", "run one conditional symmetry test");
  auto* sim = app.add_subcommand("simulate", "run N replications and write a report");
  auto* pow = app.add_subcommand("power", "bootstrap power estimate on one sample");
  auto* tune = app.add_subcommand("tune", "grid-search kernel bandwidths");
  for (auto* cmd : {inv, eqv, sim, pow, tune}) add_flags(cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (inv->parsed()) return run_single(flags, false);
    if (eqv->parsed()) return run_single(flags, true);
    if (sim->parsed()) return run_simulate(flags);
    if (pow->parsed()) return run_power(flags);
    return run_tune(flags);
  } catch (const symtest::Error& e) {
    std::cerr << "symtest: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "symtest: " << e.what() << '\n';
    return kFailure;
  }
}
