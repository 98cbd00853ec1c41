#pragma once

// Group elements, actions on R^d, Haar sampling, orbit selectors,
// representative inversions, inversion kernels and maximal invariants for the
// compact groups used by the tests (plus the Lorentz group, which is exposed
// only through its Minkowski-form maximal invariant).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "symtest/descriptor.hpp"
#include "symtest/error.hpp"
#include "symtest/random.hpp"

namespace symtest {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class GroupFamily {
  SOd,
  SymD,
  PairedSO2,       // {(g, g)} inside SO(2) x SO(2) acting on R^4
  ProductSO2xSO2,  // independent rotations of (x1, x2) and (x3, x4)
  DiscreteRotations,
  AxisSO2,  // continuous rotations about one coordinate axis of R^3
  Trivial,
  Lorentz,
};

/// Group family bound to the dimension of the space it acts on.
struct GroupSpec {
  GroupFamily family = GroupFamily::Trivial;
  int dim = 0;            // 0 only for Trivial, meaning "whatever the data has"
  double step_deg = 0.0;  // DiscreteRotations
  int axis = 0;           // 1-based rotation axis in R^3; 0 in the plane

  static GroupSpec so(int d) {
    require(d >= 2, Errc::BadParameters, "so(d) needs d >= 2");
    return {GroupFamily::SOd, d};
  }
  static GroupSpec sym(int d) {
    require(d >= 1, Errc::BadParameters, "sym(d) needs d >= 1");
    return {GroupFamily::SymD, d};
  }
  static GroupSpec paired_so2() { return {GroupFamily::PairedSO2, 4}; }
  static GroupSpec so2xso2() { return {GroupFamily::ProductSO2xSO2, 4}; }
  static GroupSpec trivial(int d = 0) { return {GroupFamily::Trivial, d}; }
  static GroupSpec lorentz(int particles = 1) {
    require(particles >= 1, Errc::BadParameters, "lorentz needs >= 1 four-momentum");
    return {GroupFamily::Lorentz, 4 * particles};
  }
  static GroupSpec axis_so2(int d, int axis) {
    require((d == 2 && axis == 0) || (d == 3 && axis >= 1 && axis <= 3), Errc::BadParameters,
            "axis rotations need d=2 (axis=0) or d=3 with axis in 1..3");
    return {GroupFamily::AxisSO2, d, 0.0, axis};
  }
  static GroupSpec discrete_rotations(double step_deg, int d, int axis) {
    require(step_deg > 0.0 && step_deg <= 360.0, Errc::BadParameters, "rotation step must be in (0, 360]");
    const double count = 360.0 / step_deg;
    require(std::abs(count - std::round(count)) < 1e-9, Errc::BadParameters,
            "rotation step must divide 360 degrees");
    GroupSpec g = axis_so2(d, axis);
    g.family = GroupFamily::DiscreteRotations;
    g.step_deg = step_deg;
    return g;
  }

  /// Accepts `so(4)`, `sym(10)`, `so2xso2`, `paired-so2`, `trivial`,
  /// `trivial(d=4)`, `rot-discrete(24deg,d=3,axis=3)`, `rot-axis(d=3,axis=3)`,
  /// `lorentz(particles=2)`.
  static GroupSpec parse(std::string_view text);

  std::string descriptor() const;

  bool compact() const { return family != GroupFamily::Lorentz; }

  int discrete_count() const { return static_cast<int>(std::lround(360.0 / step_deg)); }

  bool operator==(const GroupSpec&) const = default;
};

class GroupElement {
 public:
  struct Rotation {
    Matrix matrix;
  };
  /// `image[i]` is the position that coordinate i is moved to.
  struct Permutation {
    std::vector<int> image;
  };
  /// Factors act on disjoint coordinate blocks that partition 0..d-1.
  struct Product {
    std::vector<std::vector<int>> blocks;
    std::vector<GroupElement> factors;
  };

  GroupElement() : value_(Rotation{Matrix::Identity(1, 1)}) {}
  explicit GroupElement(Rotation r) : value_(std::move(r)) {}
  explicit GroupElement(Permutation p) : value_(std::move(p)) {}
  explicit GroupElement(Product p) : value_(std::move(p)) {}

  static GroupElement rotation(Matrix m) { return GroupElement(Rotation{std::move(m)}); }
  static GroupElement permutation(std::vector<int> image) {
    return GroupElement(Permutation{std::move(image)});
  }
  static GroupElement product(std::vector<std::vector<int>> blocks, std::vector<GroupElement> factors) {
    return GroupElement(Product{std::move(blocks), std::move(factors)});
  }
  /// Planar rotation by `angle` radians.
  static GroupElement rotation2d(double angle) {
    Matrix m(2, 2);
    m << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return rotation(std::move(m));
  }

  bool is_rotation() const { return std::holds_alternative<Rotation>(value_); }
  bool is_permutation() const { return std::holds_alternative<Permutation>(value_); }
  bool is_product() const { return std::holds_alternative<Product>(value_); }

  const Matrix& matrix() const { return std::get<Rotation>(value_).matrix; }
  const std::vector<int>& image() const { return std::get<Permutation>(value_).image; }
  const Product& product() const { return std::get<Product>(value_); }

  int dim() const {
    if (auto* r = std::get_if<Rotation>(&value_)) return static_cast<int>(r->matrix.rows());
    if (auto* p = std::get_if<Permutation>(&value_)) return static_cast<int>(p->image.size());
    int d = 0;
    for (const auto& b : std::get<Product>(value_).blocks) d += static_cast<int>(b.size());
    return d;
  }

  /// Dense d x d matrix of the linear action.
  Matrix as_matrix() const;

 private:
  std::variant<Rotation, Permutation, Product> value_;
};

// ---------------------------------------------------------------------------
// Element algebra

inline GroupElement identity_element(const GroupSpec& spec, int dim_hint = 0);
inline GroupElement compose(const GroupElement& g, const GroupElement& h);
inline GroupElement inverse(const GroupElement& g);
inline Vector act(const GroupElement& g, const Eigen::Ref<const Vector>& x);

/// Throws InvalidElement when an element breaks its variant's invariants.
inline void validate(const GroupElement& g);

/// Max-norm distance between the matrices of two elements.
inline double element_distance(const GroupElement& a, const GroupElement& b) {
  require(a.dim() == b.dim(), Errc::DimensionMismatch, "element dimensions differ");
  return (a.as_matrix() - b.as_matrix()).cwiseAbs().maxCoeff();
}

/// Angle in [0, 2pi) of a planar rotation, from its first column.
inline double rotation_angle(const Matrix& r) {
  double a = std::atan2(r(1, 0), r(0, 0));
  if (a < 0.0) a += 2.0 * std::numbers::pi;
  return a;
}

// ---------------------------------------------------------------------------
// Sampling

inline GroupElement sample_haar_one(const GroupSpec& spec, Rng& rng, int dim_hint = 0);
inline std::vector<GroupElement> sample_haar(const GroupSpec& spec, Rng& rng, std::size_t count, int dim_hint = 0);

/// Haar-distributed rotation in SO(d) via Gaussian QR with sign correction.
inline Matrix haar_rotation(int d, Rng& rng);

/// Applies an independent Haar element to each row of X.
inline Matrix transform_rows(const GroupSpec& spec, const Matrix& X, Rng& rng);

// ---------------------------------------------------------------------------
// Orbits

inline Vector orbit_selector(const GroupSpec& spec, const Eigen::Ref<const Vector>& x);
inline GroupElement representative_inversion(const GroupSpec& spec, const Eigen::Ref<const Vector>& x);

struct InversionDraw {
  GroupElement element;     // tau(x) * stabilizer
  GroupElement stabilizer;  // fixes gamma(x)
};

inline InversionDraw inversion_kernel_draw(const GroupSpec& spec, const Eigen::Ref<const Vector>& x, Rng& rng);

inline GroupElement inversion_kernel_sample(const GroupSpec& spec, const Eigen::Ref<const Vector>& x, Rng& rng) {
  return inversion_kernel_draw(spec, x, rng).element;
}

enum class InvariantKind {
  Norm,
  SortedVector,
  MinkowskiQ,
  PerBlockNorm,
  PairedRotationInvariant,
  AxialInvariant,  // (coordinate along the axis, distance from the axis)
  Identity,
};

inline InvariantKind default_invariant(const GroupSpec& spec);
inline InvariantKind parse_invariant_kind(std::string_view name);
inline Vector maximal_invariant(const GroupSpec& spec, InvariantKind kind, const Eigen::Ref<const Vector>& x);

/// Minkowski form E^2 - px^2 - py^2 - pz^2 of one four-momentum.
inline double minkowski_q(const Eigen::Ref<const Vector>& p) {
  require(p.size() == 4, Errc::DimensionMismatch, "four-momentum must have 4 components");
  return p(0) * p(0) - p(1) * p(1) - p(2) * p(2) - p(3) * p(3);
}

// ===========================================================================
// Implementation

namespace detail {

inline void require_dim(const GroupSpec& spec, Eigen::Index n) {
  if (spec.family == GroupFamily::Trivial && spec.dim == 0) return;
  require(n == spec.dim, Errc::DimensionMismatch,
          "vector has dimension " + std::to_string(n) + ", group acts on " + std::to_string(spec.dim));
}

/// The two coordinates spanning the plane rotated by an axis rotation.
inline std::pair<int, int> rotation_plane(const GroupSpec& spec) {
  switch (spec.axis) {
    case 0: return {0, 1};
    case 1: return {1, 2};
    case 2: return {2, 0};
    default: return {0, 1};
  }
}

inline Matrix embed_planar(int d, std::pair<int, int> plane, const Matrix& r2) {
  Matrix m = Matrix::Identity(d, d);
  const auto [a, b] = plane;
  m(a, a) = r2(0, 0);
  m(a, b) = r2(0, 1);
  m(b, a) = r2(1, 0);
  m(b, b) = r2(1, 1);
  return m;
}

/// Planar rotation R with R (|v|, 0) = v; identity for v = 0.
inline Matrix planar_inversion(double vx, double vy) {
  const double r = std::hypot(vx, vy);
  Matrix m = Matrix::Identity(2, 2);
  if (r == 0.0) return m;
  const double c = vx / r;
  const double s = vy / r;
  m << c, -s, s, c;
  return m;
}

/// Rotation in SO(d) carrying |x| e1 to x, rotating inside span(e1, x).
inline Matrix sod_inversion(const Eigen::Ref<const Vector>& x) {
  const Eigen::Index d = x.size();
  const double norm = x.norm();
  require(norm > 0.0, Errc::ZeroVector, "representative inversion undefined at the origin");
  Vector perp = x;
  perp(0) = 0.0;
  const double perp_norm = perp.norm();
  Vector unit_perp = Vector::Zero(d);
  double c = x(0) / norm;
  double s = perp_norm / norm;
  if (perp_norm == 0.0) {
    if (x(0) > 0.0) return Matrix::Identity(d, d);
    // x is a negative multiple of e1: half-turn in the (e1, e2) plane.
    unit_perp(1) = 1.0;
    c = -1.0;
    s = 0.0;
  } else {
    unit_perp = perp / perp_norm;
  }
  Matrix basis(d, 2);
  basis.col(0) = Vector::Unit(d, 0);
  basis.col(1) = unit_perp;
  Matrix r2(2, 2);
  r2 << c, -s, s, c;
  Matrix tau = Matrix::Identity(d, d) - basis * basis.transpose() + basis * r2 * basis.transpose();
  return tau;
}

inline std::vector<int> stable_argsort(const Eigen::Ref<const Vector>& x) {
  std::vector<int> order(static_cast<std::size_t>(x.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return x(a) < x(b); });
  return order;
}

inline std::vector<std::vector<int>> two_blocks() { return {{0, 1}, {2, 3}}; }

}  // namespace detail

inline GroupSpec GroupSpec::parse(std::string_view text) {
  const Descriptor d = parse_descriptor(text);
  auto int_arg = [&](std::string_view key, int fallback) {
    if (auto v = d.get(key)) return parse_int(*v, key);
    return fallback;
  };
  if (d.name == "so") {
    require(d.positional.size() == 1, Errc::InvalidDescriptor, "so(d) needs a dimension");
    return so(parse_int(d.positional[0], "so dimension"));
  }
  if (d.name == "sym") {
    require(d.positional.size() == 1, Errc::InvalidDescriptor, "sym(d) needs a dimension");
    return sym(parse_int(d.positional[0], "sym dimension"));
  }
  if (d.name == "so2xso2") return so2xso2();
  if (d.name == "paired-so2") return paired_so2();
  if (d.name == "trivial") {
    int dim = int_arg("d", 0);
    if (!d.positional.empty()) dim = parse_int(d.positional[0], "trivial dimension");
    return trivial(dim);
  }
  if (d.name == "lorentz") return lorentz(int_arg("particles", 1));
  if (d.name == "rot-axis") {
    const int dim = int_arg("d", 3);
    return axis_so2(dim, int_arg("axis", dim == 3 ? 3 : 0));
  }
  if (d.name == "rot-discrete") {
    require(!d.positional.empty(), Errc::InvalidDescriptor, "rot-discrete needs a step, e.g. 24deg");
    std::string step = d.positional[0];
    if (step.size() > 3 && step.substr(step.size() - 3) == "deg") step.resize(step.size() - 3);
    const int dim = int_arg("d", 3);
    return discrete_rotations(parse_double(step, "rotation step"), dim, int_arg("axis", dim == 3 ? 3 : 0));
  }
  throw Error(Errc::InvalidDescriptor, "unknown group '" + std::string(text) + "'");
}

inline std::string GroupSpec::descriptor() const {
  auto num = [](double v) {
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  };
  switch (family) {
    case GroupFamily::SOd: return "so(" + std::to_string(dim) + ")";
    case GroupFamily::SymD: return "sym(" + std::to_string(dim) + ")";
    case GroupFamily::PairedSO2: return "paired-so2";
    case GroupFamily::ProductSO2xSO2: return "so2xso2";
    case GroupFamily::Trivial: return dim == 0 ? "trivial" : "trivial(d=" + std::to_string(dim) + ")";
    case GroupFamily::Lorentz: return "lorentz(particles=" + std::to_string(dim / 4) + ")";
    case GroupFamily::AxisSO2:
      return "rot-axis(d=" + std::to_string(dim) + ",axis=" + std::to_string(axis) + ")";
    case GroupFamily::DiscreteRotations:
      return "rot-discrete(" + num(step_deg) + "deg,d=" + std::to_string(dim) + ",axis=" + std::to_string(axis) + ")";
  }
  return "unknown";
}

inline Matrix GroupElement::as_matrix() const {
  if (auto* r = std::get_if<Rotation>(&value_)) return r->matrix;
  const int d = dim();
  Matrix m = Matrix::Zero(d, d);
  if (auto* p = std::get_if<Permutation>(&value_)) {
    for (int i = 0; i < d; ++i) m(p->image[static_cast<std::size_t>(i)], i) = 1.0;
    return m;
  }
  const auto& prod = std::get<Product>(value_);
  for (std::size_t b = 0; b < prod.blocks.size(); ++b) {
    const Matrix fm = prod.factors[b].as_matrix();
    const auto& idx = prod.blocks[b];
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < idx.size(); ++j)
        m(idx[i], idx[j]) = fm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return m;
}

inline GroupElement identity_element(const GroupSpec& spec, int dim_hint) {
  const int d = spec.dim > 0 ? spec.dim : dim_hint;
  require(d > 0, Errc::DimensionMismatch, "identity needs a dimension");
  switch (spec.family) {
    case GroupFamily::SymD: {
      std::vector<int> image(static_cast<std::size_t>(d));
      std::iota(image.begin(), image.end(), 0);
      return GroupElement::permutation(std::move(image));
    }
    case GroupFamily::PairedSO2:
    case GroupFamily::ProductSO2xSO2:
      return GroupElement::product(detail::two_blocks(), {GroupElement::rotation(Matrix::Identity(2, 2)),
                                                          GroupElement::rotation(Matrix::Identity(2, 2))});
    default: return GroupElement::rotation(Matrix::Identity(d, d));
  }
}

inline GroupElement compose(const GroupElement& g, const GroupElement& h) {
  require(g.dim() == h.dim(), Errc::DimensionMismatch, "cannot compose elements of different dimension");
  if (g.is_rotation() && h.is_rotation()) return GroupElement::rotation(g.matrix() * h.matrix());
  if (g.is_permutation() && h.is_permutation()) {
    const auto& gi = g.image();
    const auto& hi = h.image();
    std::vector<int> out(gi.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = gi[static_cast<std::size_t>(hi[i])];
    return GroupElement::permutation(std::move(out));
  }
  if (g.is_product() && h.is_product()) {
    const auto& gp = g.product();
    const auto& hp = h.product();
    require(gp.blocks == hp.blocks, Errc::VariantMismatch, "product elements have different block layouts");
    std::vector<GroupElement> factors;
    factors.reserve(gp.factors.size());
    for (std::size_t b = 0; b < gp.factors.size(); ++b) factors.push_back(compose(gp.factors[b], hp.factors[b]));
    return GroupElement::product(gp.blocks, std::move(factors));
  }
  throw Error(Errc::VariantMismatch, "cannot compose elements of different kinds");
}

inline GroupElement inverse(const GroupElement& g) {
  if (g.is_rotation()) return GroupElement::rotation(g.matrix().transpose());
  if (g.is_permutation()) {
    const auto& img = g.image();
    std::vector<int> inv(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) inv[static_cast<std::size_t>(img[i])] = static_cast<int>(i);
    return GroupElement::permutation(std::move(inv));
  }
  const auto& p = g.product();
  std::vector<GroupElement> factors;
  factors.reserve(p.factors.size());
  for (const auto& f : p.factors) factors.push_back(inverse(f));
  return GroupElement::product(p.blocks, std::move(factors));
}

inline Vector act(const GroupElement& g, const Eigen::Ref<const Vector>& x) {
  require(x.size() == g.dim(), Errc::DimensionMismatch,
          "vector has dimension " + std::to_string(x.size()) + ", element acts on " + std::to_string(g.dim()));
  if (g.is_rotation()) return g.matrix() * x;
  if (g.is_permutation()) {
    const auto& img = g.image();
    Vector y(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) y(img[static_cast<std::size_t>(i)]) = x(i);
    return y;
  }
  const auto& p = g.product();
  Vector y(x.size());
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    const auto& idx = p.blocks[b];
    Vector sub(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) sub(static_cast<Eigen::Index>(i)) = x(idx[i]);
    const Vector moved = act(p.factors[b], sub);
    for (std::size_t i = 0; i < idx.size(); ++i) y(idx[i]) = moved(static_cast<Eigen::Index>(i));
  }
  return y;
}

inline void validate(const GroupElement& g) {
  if (g.is_rotation()) {
    const Matrix& r = g.matrix();
    require(r.rows() == r.cols(), Errc::InvalidElement, "rotation matrix must be square");
    const double ortho = (r.transpose() * r - Matrix::Identity(r.rows(), r.cols())).cwiseAbs().maxCoeff();
    require(ortho <= 1e-9, Errc::InvalidElement, "rotation matrix is not orthogonal");
    require(std::abs(r.determinant() - 1.0) <= 1e-9, Errc::InvalidElement, "rotation determinant is not 1");
    return;
  }
  if (g.is_permutation()) {
    const auto& img = g.image();
    std::vector<char> seen(img.size(), 0);
    for (int v : img) {
      require(v >= 0 && static_cast<std::size_t>(v) < img.size() && !seen[static_cast<std::size_t>(v)],
              Errc::InvalidElement, "permutation is not a bijection");
      seen[static_cast<std::size_t>(v)] = 1;
    }
    return;
  }
  const auto& p = g.product();
  require(p.blocks.size() == p.factors.size(), Errc::InvalidElement, "product block/factor count mismatch");
  std::size_t total = 0;
  for (const auto& b : p.blocks) total += b.size();
  std::vector<char> seen(total, 0);
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    require(static_cast<int>(p.blocks[b].size()) == p.factors[b].dim(), Errc::InvalidElement,
            "product factor dimension does not match its block");
    for (int c : p.blocks[b]) {
      require(c >= 0 && static_cast<std::size_t>(c) < total && !seen[static_cast<std::size_t>(c)],
              Errc::InvalidElement, "product blocks must partition the coordinates");
      seen[static_cast<std::size_t>(c)] = 1;
    }
    validate(p.factors[b]);
  }
}

inline Matrix haar_rotation(int d, Rng& rng) {
  if (d == 1) return Matrix::Identity(1, 1);
  const Matrix a = gaussian_matrix(rng, d, d);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ();
  const Matrix& t = qr.matrixQR();
  for (int j = 0; j < d; ++j)
    if (t(j, j) < 0.0) q.col(j) *= -1.0;
  if (q.determinant() < 0.0) q.col(d - 1) *= -1.0;
  return q;
}

inline GroupElement sample_haar_one(const GroupSpec& spec, Rng& rng, int dim_hint) {
  switch (spec.family) {
    case GroupFamily::Lorentz:
      throw Error(Errc::NonCompactGroup, "no Haar probability measure on the Lorentz group");
    case GroupFamily::Trivial: return identity_element(spec, dim_hint);
    case GroupFamily::SOd: return GroupElement::rotation(haar_rotation(spec.dim, rng));
    case GroupFamily::SymD: {
      std::vector<int> image(static_cast<std::size_t>(spec.dim));
      std::iota(image.begin(), image.end(), 0);
      // Fisher-Yates
      for (std::size_t i = image.size(); i > 1; --i) std::swap(image[i - 1], image[uniform_index(rng, i)]);
      return GroupElement::permutation(std::move(image));
    }
    case GroupFamily::PairedSO2: {
      const double angle = 2.0 * std::numbers::pi * uniform01(rng);
      const GroupElement r = GroupElement::rotation2d(angle);
      return GroupElement::product(detail::two_blocks(), {r, r});
    }
    case GroupFamily::ProductSO2xSO2: {
      const double a = 2.0 * std::numbers::pi * uniform01(rng);
      const double b = 2.0 * std::numbers::pi * uniform01(rng);
      return GroupElement::product(detail::two_blocks(), {GroupElement::rotation2d(a), GroupElement::rotation2d(b)});
    }
    case GroupFamily::AxisSO2: {
      const double angle = 2.0 * std::numbers::pi * uniform01(rng);
      return GroupElement::rotation(
          detail::embed_planar(spec.dim, detail::rotation_plane(spec), GroupElement::rotation2d(angle).matrix()));
    }
    case GroupFamily::DiscreteRotations: {
      const auto k = uniform_index(rng, static_cast<std::size_t>(spec.discrete_count()));
      const double angle = static_cast<double>(k) * spec.step_deg * std::numbers::pi / 180.0;
      return GroupElement::rotation(
          detail::embed_planar(spec.dim, detail::rotation_plane(spec), GroupElement::rotation2d(angle).matrix()));
    }
  }
  throw Error(Errc::UnsupportedFamily, "unknown group family");
}

inline std::vector<GroupElement> sample_haar(const GroupSpec& spec, Rng& rng, std::size_t count, int dim_hint) {
  std::vector<GroupElement> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample_haar_one(spec, rng, dim_hint));
  return out;
}

inline Matrix transform_rows(const GroupSpec& spec, const Matrix& X, Rng& rng) {
  require(spec.compact(), Errc::NonCompactGroup, "cannot draw Haar transformations for " + spec.descriptor());
  if (X.rows() > 0) detail::require_dim(spec, X.cols());
  Matrix out(X.rows(), X.cols());
  const int d = static_cast<int>(X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const GroupElement g = sample_haar_one(spec, rng, d);
    out.row(i) = act(g, X.row(i).transpose()).transpose();
  }
  return out;
}

inline Vector orbit_selector(const GroupSpec& spec, const Eigen::Ref<const Vector>& x) {
  detail::require_dim(spec, x.size());
  switch (spec.family) {
    case GroupFamily::Trivial: return x;
    case GroupFamily::SOd: {
      Vector out = Vector::Zero(x.size());
      out(0) = x.norm();
      return out;
    }
    case GroupFamily::SymD: {
      Vector out = x;
      std::stable_sort(out.begin(), out.end());
      return out;
    }
    case GroupFamily::ProductSO2xSO2: return Vector{{std::hypot(x(0), x(1)), 0.0, std::hypot(x(2), x(3)), 0.0}};
    case GroupFamily::PairedSO2: {
      if (x.isZero(0.0)) return x;
      const GroupElement tau = representative_inversion(spec, x);
      return act(inverse(tau), x);
    }
    case GroupFamily::AxisSO2: {
      const auto [a, b] = detail::rotation_plane(spec);
      Vector out = x;
      out(a) = std::hypot(x(a), x(b));
      out(b) = 0.0;
      return out;
    }
    default: break;
  }
  throw Error(Errc::UnsupportedFamily, "no orbit selector for " + spec.descriptor());
}

inline GroupElement representative_inversion(const GroupSpec& spec, const Eigen::Ref<const Vector>& x) {
  detail::require_dim(spec, x.size());
  switch (spec.family) {
    case GroupFamily::Trivial: return identity_element(spec, static_cast<int>(x.size()));
    case GroupFamily::SOd: return GroupElement::rotation(detail::sod_inversion(x));
    case GroupFamily::SymD: return GroupElement::permutation(detail::stable_argsort(x));
    case GroupFamily::ProductSO2xSO2: {
      require(std::hypot(x(0), x(1)) > 0.0 && std::hypot(x(2), x(3)) > 0.0, Errc::ZeroVector,
              "representative inversion undefined when a block is zero");
      return GroupElement::product(detail::two_blocks(),
                                   {GroupElement::rotation(detail::planar_inversion(x(0), x(1))),
                                    GroupElement::rotation(detail::planar_inversion(x(2), x(3)))});
    }
    case GroupFamily::PairedSO2: {
      const bool first = std::hypot(x(0), x(1)) > 0.0;
      require(first || std::hypot(x(2), x(3)) > 0.0, Errc::ZeroVector, "representative inversion undefined at the origin");
      const Matrix r = first ? detail::planar_inversion(x(0), x(1)) : detail::planar_inversion(x(2), x(3));
      return GroupElement::product(detail::two_blocks(), {GroupElement::rotation(r), GroupElement::rotation(r)});
    }
    case GroupFamily::AxisSO2: {
      const auto plane = detail::rotation_plane(spec);
      require(std::hypot(x(plane.first), x(plane.second)) > 0.0, Errc::ZeroVector,
              "representative inversion undefined on the rotation axis");
      return GroupElement::rotation(
          detail::embed_planar(spec.dim, plane, detail::planar_inversion(x(plane.first), x(plane.second))));
    }
    default: break;
  }
  throw Error(Errc::UnsupportedFamily, "no representative inversion for " + spec.descriptor());
}

inline InversionDraw inversion_kernel_draw(const GroupSpec& spec, const Eigen::Ref<const Vector>& x, Rng& rng) {
  GroupElement tau = representative_inversion(spec, x);
  if (spec.family == GroupFamily::SOd && spec.dim >= 3) {
    // Uniform element of the stabilizer of e1: rotations of the remaining d-1 axes.
    Matrix stab = Matrix::Identity(spec.dim, spec.dim);
    stab.bottomRightCorner(spec.dim - 1, spec.dim - 1) = haar_rotation(spec.dim - 1, rng);
    GroupElement h = GroupElement::rotation(std::move(stab));
    GroupElement g = compose(tau, h);
    return {std::move(g), std::move(h)};
  }
  // Every other supported action is free away from the degenerate set.
  GroupElement id = identity_element(spec, static_cast<int>(x.size()));
  return {std::move(tau), std::move(id)};
}

inline InvariantKind default_invariant(const GroupSpec& spec) {
  switch (spec.family) {
    case GroupFamily::SOd: return InvariantKind::Norm;
    case GroupFamily::SymD: return InvariantKind::SortedVector;
    case GroupFamily::Lorentz: return InvariantKind::MinkowskiQ;
    case GroupFamily::ProductSO2xSO2: return InvariantKind::PerBlockNorm;
    case GroupFamily::PairedSO2: return InvariantKind::PairedRotationInvariant;
    case GroupFamily::AxisSO2: return InvariantKind::AxialInvariant;
    case GroupFamily::Trivial: return InvariantKind::Identity;
    case GroupFamily::DiscreteRotations: break;
  }
  throw Error(Errc::UnsupportedKind, "no maximal invariant for " + spec.descriptor());
}

inline InvariantKind parse_invariant_kind(std::string_view name) {
  const std::string n = detail::lower(std::string(name));
  if (n == "norm") return InvariantKind::Norm;
  if (n == "sorted") return InvariantKind::SortedVector;
  if (n == "minkowski-q" || n == "minkowski") return InvariantKind::MinkowskiQ;
  if (n == "block-norm") return InvariantKind::PerBlockNorm;
  if (n == "paired-rotation") return InvariantKind::PairedRotationInvariant;
  if (n == "axial") return InvariantKind::AxialInvariant;
  if (n == "identity") return InvariantKind::Identity;
  throw Error(Errc::UnsupportedKind, "unknown maximal invariant '" + std::string(name) + "'");
}

inline Vector maximal_invariant(const GroupSpec& spec, InvariantKind kind, const Eigen::Ref<const Vector>& x) {
  detail::require_dim(spec, x.size());
  auto allowed = [&](std::initializer_list<GroupFamily> fams) {
    require(std::find(fams.begin(), fams.end(), spec.family) != fams.end(), Errc::UnsupportedKind,
            "invariant kind is not invariant under " + spec.descriptor());
  };
  switch (kind) {
    case InvariantKind::Norm:
      allowed({GroupFamily::SOd, GroupFamily::SymD});
      return Vector::Constant(1, x.norm());
    case InvariantKind::SortedVector: {
      allowed({GroupFamily::SymD});
      Vector out = x;
      std::stable_sort(out.begin(), out.end());
      return out;
    }
    case InvariantKind::MinkowskiQ: {
      allowed({GroupFamily::Lorentz});
      require(x.size() % 4 == 0 && x.size() > 0, Errc::DimensionMismatch, "input must be whole four-momenta");
      Vector out(x.size() / 4);
      for (Eigen::Index k = 0; k < out.size(); ++k) out(k) = minkowski_q(x.segment(4 * k, 4));
      return out;
    }
    case InvariantKind::PerBlockNorm:
      allowed({GroupFamily::ProductSO2xSO2});
      return Vector{{std::hypot(x(0), x(1)), std::hypot(x(2), x(3))}};
    case InvariantKind::PairedRotationInvariant: {
      allowed({GroupFamily::PairedSO2});
      const double cross = x(0) * x(3) - x(1) * x(2);
      const double sign = cross > 0.0 ? 1.0 : (cross < 0.0 ? -1.0 : 0.0);
      return Vector{{std::hypot(x(0), x(1)), std::hypot(x(2), x(3)), x(0) * x(2) + x(1) * x(3), sign}};
    }
    case InvariantKind::AxialInvariant: {
      allowed({GroupFamily::AxisSO2, GroupFamily::DiscreteRotations});
      const auto [a, b] = detail::rotation_plane(spec);
      if (spec.dim == 2) return Vector::Constant(1, std::hypot(x(a), x(b)));
      return Vector{{x(spec.axis - 1), std::hypot(x(a), x(b))}};
    }
    case InvariantKind::Identity:
      allowed({GroupFamily::Trivial});
      return x;
  }
  throw Error(Errc::UnsupportedKind, "unknown invariant kind");
}

}  // namespace symtest
