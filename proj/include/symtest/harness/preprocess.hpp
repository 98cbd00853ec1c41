#pragma once

// Preprocessing for the satellite magnetic-field and dijet data layouts.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "symtest/condsym.hpp"
#include "symtest/error.hpp"
#include "symtest/groups.hpp"

namespace symtest {

struct SwarmOptions {
  /// Rotation axis in the original Earth-centred frame; data are rotated so
  /// this axis becomes the third coordinate axis.
  Eigen::Vector3d pole = Eigen::Vector3d::UnitZ();
};

/// Rotation taking `axis` to e3.
inline Eigen::Matrix3d align_to_e3(const Eigen::Vector3d& axis) {
  require(axis.norm() > 0.0, Errc::RangeError, "pole axis must be nonzero");
  return Eigen::Quaterniond::FromTwoVectors(axis.normalized(), Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

/// Cartesian positions from columns lat (deg), lon (deg), radius, rotated
/// so the pole axis is e3 and scaled to max norm 1.
inline Matrix swarm_positions(const Matrix& records, const SwarmOptions& opt = {}) {
  require(records.cols() >= 3, Errc::SchemaMismatch, "expected lat, lon and radius columns");
  const Eigen::Index n = records.rows();
  require(n >= 1, Errc::EmptySample, "no records");
  const Eigen::Matrix3d rot = align_to_e3(opt.pole);
  constexpr double deg = std::numbers::pi / 180.0;
  Matrix X(n, 3);
  double max_norm = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lat = records(i, 0), lon = records(i, 1), r = records(i, 2);
    const std::string at = " at row " + std::to_string(i + 1);
    require(lat >= -90.0 && lat <= 90.0, Errc::RangeError, "latitude out of [-90, 90]" + at);
    require(lon >= -180.0 && lon < 360.0, Errc::RangeError, "longitude out of [-180, 360)" + at);
    require(r > 0.0, Errc::RangeError, "radius must be positive" + at);
    const Eigen::Vector3d p(r * std::cos(lat * deg) * std::cos(lon * deg), r * std::cos(lat * deg) * std::sin(lon * deg),
                            r * std::sin(lat * deg));
    X.row(i) = (rot * p).transpose();
    max_norm = std::max(max_norm, r);
  }
  return X / max_norm;
}

/// Columns lat, lon, radius, then one or more field components. Every field
/// column is standardized; M is (height along the axis, distance from it)
/// and the field is treated as invariant, so Z = Y.
inline PairedDataset preprocess_swarm(const Matrix& records, const SwarmOptions& opt = {}) {
  require(records.cols() >= 4, Errc::SchemaMismatch, "expected lat, lon, radius and at least one field column");
  const Matrix X = swarm_positions(records, opt);
  const Eigen::Index n = records.rows();
  Matrix Y = records.rightCols(records.cols() - 3);
  for (Eigen::Index c = 0; c < Y.cols(); ++c) {
    const double mean = Y.col(c).mean();
    const double var = n > 1 ? (Y.col(c).array() - mean).square().sum() / static_cast<double>(n - 1) : 0.0;
    require(var > 0.0, Errc::DegenerateVariance, "field column " + std::to_string(c + 1) + " has zero variance");
    Y.col(c) = (Y.col(c).array() - mean) / std::sqrt(var);
  }
  return transform_responses(X, Y, GroupSpec::axis_so2(3, 3), false);
}

/// records: columns pT1, phi1, pT2, phi2 of the two leading constituents.
/// Returns (p1x, p1y, p2x, p2y).
inline Matrix preprocess_dijet(const Matrix& records) {
  require(records.cols() == 4, Errc::SchemaMismatch, "expected pT1, phi1, pT2, phi2");
  Matrix X(records.rows(), 4);
  for (Eigen::Index i = 0; i < records.rows(); ++i)
    for (int k = 0; k < 2; ++k) {
      const double pt = records(i, 2 * k), phi = records(i, 2 * k + 1);
      require(pt >= 0.0, Errc::RangeError, "negative transverse momentum at row " + std::to_string(i + 1));
      X(i, 2 * k) = pt * std::cos(phi);
      X(i, 2 * k + 1) = pt * std::sin(phi);
    }
  return X;
}

}  // namespace symtest
