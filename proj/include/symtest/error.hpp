#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace symtest {

enum class Errc {
  DimensionMismatch,
  VariantMismatch,
  InvalidElement,
  NonCompactGroup,
  UnsupportedFamily,
  UnsupportedKind,
  ZeroVector,
  InvalidRotation,
  InvalidDescriptor,
  AllPointsIdentical,
  SampleTooSmall,
  EmptySample,
  BadLandmarkCount,
  BadMonteCarloBudget,
  BadProjectionCount,
  SingularSolve,
  DegenerateDensity,
  RankDeficientDesign,
  BadParameters,
  ConfigInvalid,
  DataFileMissing,
  SchemaMismatch,
  ParseError,
  RangeError,
  DegenerateVariance,
  TooFewValues,
  EmptyGrid,
  IoError,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::VariantMismatch: return "VariantMismatch";
    case Errc::InvalidElement: return "InvalidElement";
    case Errc::NonCompactGroup: return "NonCompactGroup";
    case Errc::UnsupportedFamily: return "UnsupportedFamily";
    case Errc::UnsupportedKind: return "UnsupportedKind";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::InvalidRotation: return "InvalidRotation";
    case Errc::InvalidDescriptor: return "InvalidDescriptor";
    case Errc::AllPointsIdentical: return "AllPointsIdentical";
    case Errc::SampleTooSmall: return "SampleTooSmall";
    case Errc::EmptySample: return "EmptySample";
    case Errc::BadLandmarkCount: return "BadLandmarkCount";
    case Errc::BadMonteCarloBudget: return "BadMonteCarloBudget";
    case Errc::BadProjectionCount: return "BadProjectionCount";
    case Errc::SingularSolve: return "SingularSolve";
    case Errc::DegenerateDensity: return "DegenerateDensity";
    case Errc::RankDeficientDesign: return "RankDeficientDesign";
    case Errc::BadParameters: return "BadParameters";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::DataFileMissing: return "DataFileMissing";
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::ParseError: return "ParseError";
    case Errc::RangeError: return "RangeError";
    case Errc::DegenerateVariance: return "DegenerateVariance";
    case Errc::TooFewValues: return "TooFewValues";
    case Errc::EmptyGrid: return "EmptyGrid";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable error code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Raised by CSV ingestion; row is the 1-based data row (header excluded).
class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::string column, const std::string& cell)
      : Error(Errc::ParseError, "row " + std::to_string(row) + ", column '" + column +
                                    "': cannot parse '" + cell + "'"),
        row_(row),
        column_(std::move(column)) {}

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace symtest
