#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "symtest/error.hpp"
#include "symtest/harness/csv.hpp"
#include "symtest/stats.hpp"
#include "symtest/version.hpp"

namespace symtest {

using ordered_json = nlohmann::ordered_json;

struct SimulationReport {
  std::vector<double> p_values;
  std::vector<double> wall_times;  // seconds per replication
  double alpha = 0.05;
  double rejection_rate = 0.0;
  double standard_error = 0.0;
  bool has_ks = false;
  KsResult ks;
  double mean_wall_time = 0.0;
  ordered_json config;
  std::string version = kVersion;
};

inline double rejection_rate(const std::vector<double>& p_values, double alpha) {
  require(!p_values.empty(), Errc::TooFewValues, "no p-values");
  std::size_t k = 0;
  for (double p : p_values)
    if (p <= alpha) ++k;
  return static_cast<double>(k) / static_cast<double>(p_values.size());
}

/// KS uniformity of a p-value sample. Monte Carlo p-values on the lattice
/// k/(B+1) are compared with the discrete uniform law instead, since the
/// continuous reference would be off by up to 1/(B+1) at every jump.
inline KsResult pvalue_uniformity_check(const std::vector<double>& p_values, int B = 0) {
  if (on_mc_lattice(p_values, B)) return ks_uniform_lattice(p_values, B);
  return ks_uniform(p_values);
}

inline SimulationReport make_report(std::vector<double> p_values, std::vector<double> wall_times, double alpha,
                                    ordered_json config, int B = 0) {
  require(!p_values.empty(), Errc::TooFewValues, "a report needs at least one replication");
  require(wall_times.empty() || wall_times.size() == p_values.size(), Errc::BadParameters,
          "one wall time per replication");
  SimulationReport r;
  r.alpha = alpha;
  r.p_values = std::move(p_values);
  r.wall_times = wall_times.empty() ? std::vector<double>(r.p_values.size(), 0.0) : std::move(wall_times);
  r.rejection_rate = rejection_rate(r.p_values, alpha);
  r.standard_error = binomial_se(r.rejection_rate, r.p_values.size());
  if (r.p_values.size() >= 5) {
    r.has_ks = true;
    r.ks = pvalue_uniformity_check(r.p_values, B);
  }
  double t = 0.0;
  for (double w : r.wall_times) t += w;
  r.mean_wall_time = t / static_cast<double>(r.wall_times.size());
  r.config = std::move(config);
  return r;
}

inline ordered_json to_json(const SimulationReport& r) {
  ordered_json j;
  j["version"] = r.version;
  j["replications"] = r.p_values.size();
  j["alpha"] = r.alpha;
  j["rejection_rate"] = r.rejection_rate;
  j["standard_error"] = r.standard_error;
  if (r.has_ks) {
    j["ks_statistic"] = r.ks.statistic;
    j["ks_p_value"] = r.ks.p_value;
    j["ks_lattice"] = r.ks.on_lattice;
  } else {
    j["ks_statistic"] = nullptr;
    j["ks_p_value"] = nullptr;
    j["ks_lattice"] = nullptr;
  }
  j["mean_wall_time_s"] = r.mean_wall_time;
  j["p_values"] = r.p_values;
  j["wall_times_s"] = r.wall_times;
  j["config"] = r.config;
  return j;
}

enum class ReportFormat { Json, Csv };

inline ReportFormat report_format_for(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? ReportFormat::Csv : ReportFormat::Json;
}

namespace detail {

inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline std::string render_report(const SimulationReport& r, ReportFormat format) {
  if (format == ReportFormat::Json) return to_json(r).dump(2) + "\n";
  std::ostringstream out;
  out << "replication,p_value,reject,wall_time_s\n";
  for (std::size_t i = 0; i < r.p_values.size(); ++i)
    out << i << ',' << detail::fmt17(r.p_values[i]) << ',' << (r.p_values[i] <= r.alpha ? 1 : 0) << ','
        << detail::fmt17(r.wall_times[i]) << '\n';
  out << "# rejection_rate=" << detail::fmt17(r.rejection_rate) << " standard_error=" << detail::fmt17(r.standard_error)
      << " alpha=" << detail::fmt17(r.alpha);
  if (r.has_ks) out << " ks_statistic=" << detail::fmt17(r.ks.statistic) << " ks_p_value=" << detail::fmt17(r.ks.p_value);
  out << " replications=" << r.p_values.size() << " version=" << r.version << '\n';
  return out.str();
}

inline void emit_report(const SimulationReport& r, const std::filesystem::path& path, ReportFormat format) {
  require(!r.p_values.empty(), Errc::TooFewValues, "refusing to emit an empty report");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), Errc::IoError, "cannot open '" + path.string() + "' for writing");
  out << render_report(r, format);
  out.flush();
  require(out.good(), Errc::IoError, "failed writing '" + path.string() + "'");
}

/// p-value column of a CSV report.
inline std::vector<double> read_report_pvalues(const std::filesystem::path& path) {
  const Eigen::MatrixXd m = table_columns(read_csv(path), {"p_value"});
  return std::vector<double>(m.data(), m.data() + m.size());
}

}  // namespace symtest
