#pragma once

// CSV ingestion with a header row. Lines starting with '#' are comments.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "symtest/descriptor.hpp"
#include "symtest/error.hpp"

namespace symtest {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; SchemaMismatch names it when absent.
  std::size_t column(std::string_view name) const {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) return c;
    throw Error(Errc::SchemaMismatch, "missing column '" + std::string(name) + "'");
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(trim(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  cells.push_back(trim(cell));
  return cells;
}

}  // namespace detail

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(std::filesystem::is_regular_file(path) && in.good(), Errc::DataFileMissing,
          "cannot open data file '" + path.string() + "'");
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (detail::trim(line).empty() || line.front() == '#') continue;
    auto cells = detail::split_csv_line(line);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    require(cells.size() == t.header.size(), Errc::SchemaMismatch,
            "row " + std::to_string(t.rows.size() + 1) + " has " + std::to_string(cells.size()) +
                " cells, header has " + std::to_string(t.header.size()));
    t.rows.push_back(std::move(cells));
  }
  require(have_header, Errc::SchemaMismatch, "data file '" + path.string() + "' has no header row");
  return t;
}

/// Parses a numeric cell; `row` is the 1-based data row (header excluded).
inline double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last) throw ParseError(row, column, cell);
  return v;
}

/// Dense matrix of the named columns, in the given order.
inline Eigen::MatrixXd table_columns(const CsvTable& t, const std::vector<std::string>& names) {
  std::vector<std::size_t> idx;
  for (const auto& name : names) idx.push_back(t.column(name));
  Eigen::MatrixXd out(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t c = 0; c < idx.size(); ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = parse_cell(t.rows[r][idx[c]], r + 1, names[c]);
  return out;
}

enum class ColumnRole { Feature, Response, GroupBlock };

/// Column-to-role map, e.g. `lat:feature, lon:feature, field:response`.
/// A bare name is a feature.
struct CsvSchema {
  std::vector<std::pair<std::string, ColumnRole>> columns;

  static CsvSchema parse(std::string_view text) {
    CsvSchema s;
    std::size_t start = 0;
    const std::string body(text);
    while (start <= body.size()) {
      auto comma = body.find(',', start);
      if (comma == std::string::npos) comma = body.size();
      const std::string item = detail::trim(std::string_view(body).substr(start, comma - start));
      start = comma + 1;
      if (item.empty()) continue;
      const auto colon = item.find(':');
      const std::string name = detail::trim(item.substr(0, colon));
      ColumnRole role = ColumnRole::Feature;
      if (colon != std::string::npos) {
        const std::string r = detail::lower(detail::trim(item.substr(colon + 1)));
        if (r == "feature" || r == "x") role = ColumnRole::Feature;
        else if (r == "response" || r == "y") role = ColumnRole::Response;
        else if (r == "group-block" || r == "block") role = ColumnRole::GroupBlock;
        else throw Error(Errc::ConfigInvalid, "unknown column role '" + r + "'");
      }
      require(!name.empty(), Errc::ConfigInvalid, "empty column name in schema");
      s.columns.emplace_back(name, role);
    }
    require(!s.columns.empty(), Errc::ConfigInvalid, "schema declares no columns");
    return s;
  }

  std::vector<std::string> names(ColumnRole role) const {
    std::vector<std::string> out;
    for (const auto& [n, r] : columns)
      if (r == role) out.push_back(n);
    return out;
  }
};

struct Dataset {
  Eigen::MatrixXd X;       // feature columns
  Eigen::MatrixXd Y;       // response columns, possibly empty
  Eigen::MatrixXd blocks;  // group-block labels, possibly empty
  std::vector<std::string> feature_names;
  std::vector<std::string> response_names;
};

inline Dataset ingest_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  const CsvTable t = read_csv(path);
  Dataset d;
  d.feature_names = schema.names(ColumnRole::Feature);
  d.response_names = schema.names(ColumnRole::Response);
  // Check every declared column before parsing so the error names the column.
  for (const auto& [name, role] : schema.columns) (void)t.column(name);
  d.X = table_columns(t, d.feature_names);
  d.Y = table_columns(t, d.response_names);
  d.blocks = table_columns(t, schema.names(ColumnRole::GroupBlock));
  return d;
}

}  // namespace symtest
