#pragma once

// Generative models for closed-loop size and power simulations.

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <regex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "symtest/descriptor.hpp"
#include "symtest/error.hpp"
#include "symtest/groups.hpp"
#include "symtest/random.hpp"

namespace symtest {

enum class GeneratorKind {
  GaussianIso,
  GaussianMean,
  GaussianCov,
  WishartCov,
  ExchPlus,
  ExchMinus,
  VmfRotated,
  CondGaussShift,
  CondGaussAbs,
  CondGaussProj,
  TopQuarkLabel,
};

struct Generator {
  GeneratorKind kind = GeneratorKind::GaussianIso;
  int d = 2;
  Vector mu;      // GaussianMean
  Matrix sigma;   // GaussianCov
  Vector xi;      // VmfRotated mean direction
  double kappa = 0.0;
  int particles = 2;         // TopQuarkLabel
  double threshold = 200.0;  // TopQuarkLabel energy cut
  bool invariant_labels = false;

  bool conditional() const {
    return kind == GeneratorKind::CondGaussShift || kind == GeneratorKind::CondGaussAbs ||
           kind == GeneratorKind::CondGaussProj || kind == GeneratorKind::TopQuarkLabel;
  }

  static Generator parse(std::string_view text);
  std::string descriptor() const;
};

/// Rows of X; Y is empty for marginal models.
struct Sample {
  Matrix X;
  Matrix Y;
};

// ---------------------------------------------------------------------------
// Primitive samplers

/// Square root of a chi-squared(d) draw, as the norm of d standard normals.
inline double chi_d_sample(int d, Rng& rng) {
  require(d >= 1, Errc::BadParameters, "chi_d needs d >= 1");
  double s = 0.0;
  for (int k = 0; k < d; ++k) {
    const double z = standard_normal(rng);
    s += z * z;
  }
  return std::sqrt(s);
}

/// 1 on the diagonal, `off` elsewhere.
inline Matrix equicorrelation(int d, double off) {
  Matrix s = Matrix::Constant(d, d, off);
  s.diagonal().setOnes();
  return s;
}

inline Matrix exch_plus_cov(int d) { return equicorrelation(d, 1.0 / d); }

inline Matrix exch_minus_cov(int d) {
  require(d >= 2, Errc::BadParameters, "exch-minus needs d >= 2");
  return equicorrelation(d, -1.0 / (d - 1));
}

/// Wishart(I_d, d) by the Bartlett decomposition.
inline Matrix wishart_identity(int d, Rng& rng) {
  require(d >= 1, Errc::BadParameters, "Wishart needs d >= 1");
  Matrix a = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    std::chi_squared_distribution<double> chi(static_cast<double>(d - i));
    a(i, i) = std::sqrt(chi(rng));
    for (int j = 0; j < i; ++j) a(i, j) = standard_normal(rng);
  }
  return a * a.transpose();
}

/// Factor F with F F^T = sigma, tolerating positive semidefinite input.
inline Matrix covariance_factor(const Matrix& sigma) {
  require(sigma.rows() == sigma.cols(), Errc::BadParameters, "covariance must be square");
  require((sigma - sigma.transpose()).cwiseAbs().maxCoeff() <= 1e-10, Errc::BadParameters,
          "covariance must be symmetric");
  Eigen::LDLT<Matrix> ldlt(sigma);
  const Vector dvec = ldlt.vectorD();
  require(ldlt.info() == Eigen::Success && dvec.minCoeff() >= -1e-10, Errc::BadParameters,
          "covariance is not positive semidefinite");
  Matrix l = ldlt.matrixL();
  l = l * dvec.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  return ldlt.transpositionsP().transpose() * l;
}

inline Matrix gaussian_rows(const Vector& mean, const Matrix& factor, Eigen::Index n, Rng& rng) {
  const Matrix z = gaussian_matrix(rng, n, factor.cols());
  Matrix x = z * factor.transpose();
  x.rowwise() += mean.transpose();
  return x;
}

/// Wood's rejection sampler for the von Mises-Fisher law on S^{d-1}.
inline Vector vmf_sample(const Vector& mean_dir, double kappa, Rng& rng) {
  const Eigen::Index d = mean_dir.size();
  require(d >= 2, Errc::BadParameters, "vMF needs d >= 2");
  require(kappa >= 0.0 && std::isfinite(kappa), Errc::BadParameters, "vMF concentration must be non-negative");
  require(std::abs(mean_dir.norm() - 1.0) <= 1e-9, Errc::BadParameters, "vMF mean direction must be a unit vector");
  const double dm1 = static_cast<double>(d - 1);
  double w;
  if (kappa == 0.0) {
    // Marginal of the first coordinate of a uniform point.
    Vector g(d);
    for (Eigen::Index k = 0; k < d; ++k) g(k) = standard_normal(rng);
    w = g(0) / g.norm();
  } else {
    const double b = dm1 / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + dm1 * dm1));
    const double x0 = (1.0 - b) / (1.0 + b);
    const double c = kappa * x0 + dm1 * std::log(1.0 - x0 * x0);
    std::gamma_distribution<double> ga(dm1 / 2.0, 1.0);
    while (true) {
      const double g1 = ga(rng), g2 = ga(rng);
      const double z = g1 / (g1 + g2);
      w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
      const double u = uniform01(rng);
      if (kappa * w + dm1 * std::log(1.0 - x0 * w) - c >= std::log(u)) break;
    }
  }
  // Uniform direction orthogonal to e1, then rotate e1 onto the mean.
  Vector v(d - 1);
  double nrm = 0.0;
  while (nrm == 0.0) {
    for (Eigen::Index k = 0; k < d - 1; ++k) v(k) = standard_normal(rng);
    nrm = v.norm();
  }
  Vector onto_e1(d);
  onto_e1(0) = w;
  onto_e1.tail(d - 1) = std::sqrt(std::max(0.0, 1.0 - w * w)) * v / nrm;
  const GroupElement tau = representative_inversion(GroupSpec::so(static_cast<int>(d)), mean_dir);
  return act(tau, onto_e1);
}

/// Four-momentum (E, px, py, pz) with the given mass and 3-momentum.
inline Vector four_momentum(double mass, const Eigen::Vector3d& p) {
  Vector out(4);
  out(0) = std::sqrt(mass * mass + p.squaredNorm());
  out.tail(3) = p;
  return out;
}

// ---------------------------------------------------------------------------
// Generator

inline Sample sample(const Generator& gen, Eigen::Index n, Rng& rng) {
  require(n >= 1, Errc::BadParameters, "sample size must be positive");
  require(gen.d >= 1, Errc::BadParameters, "dimension must be positive");
  const int d = gen.d;
  Sample s;
  const Vector zero = Vector::Zero(d);
  switch (gen.kind) {
    case GeneratorKind::GaussianIso: s.X = gaussian_matrix(rng, n, d); break;
    case GeneratorKind::GaussianMean:
      require(gen.mu.size() == d, Errc::BadParameters, "mean vector has the wrong dimension");
      s.X = gaussian_matrix(rng, n, d);
      s.X.rowwise() += gen.mu.transpose();
      break;
    case GeneratorKind::GaussianCov:
      require(gen.sigma.rows() == d, Errc::BadParameters, "covariance has the wrong dimension");
      s.X = gaussian_rows(zero, covariance_factor(gen.sigma), n, rng);
      break;
    case GeneratorKind::WishartCov: s.X = gaussian_rows(zero, covariance_factor(wishart_identity(d, rng)), n, rng); break;
    case GeneratorKind::ExchPlus: s.X = gaussian_rows(zero, covariance_factor(exch_plus_cov(d)), n, rng); break;
    case GeneratorKind::ExchMinus: s.X = gaussian_rows(zero, covariance_factor(exch_minus_cov(d)), n, rng); break;
    case GeneratorKind::VmfRotated: {
      Vector xi = gen.xi.size() == d ? gen.xi : Vector(Vector::Unit(d, 0));
      s.X.resize(n, d);
      for (Eigen::Index i = 0; i < n; ++i) s.X.row(i) = (chi_d_sample(d, rng) * vmf_sample(xi, gen.kappa, rng)).transpose();
      break;
    }
    case GeneratorKind::CondGaussShift:
    case GeneratorKind::CondGaussAbs:
    case GeneratorKind::CondGaussProj: {
      s.X = gaussian_matrix(rng, n, d);
      s.Y = gaussian_matrix(rng, n, d);
      if (gen.kind == GeneratorKind::CondGaussShift) s.Y += s.X;
      else if (gen.kind == GeneratorKind::CondGaussAbs) s.Y += s.X.cwiseAbs();
      else s.Y.colwise() += s.X.col(0);
      break;
    }
    case GeneratorKind::TopQuarkLabel: {
      require(gen.particles >= 1, Errc::BadParameters, "need at least one particle");
      s.X.resize(n, 4 * gen.particles);
      s.Y.resize(n, 1);
      std::uniform_real_distribution<double> mass(0.0, 80.0);
      for (Eigen::Index i = 0; i < n; ++i) {
        double first_mass = 0.0;
        for (int k = 0; k < gen.particles; ++k) {
          const Eigen::Vector3d p(120.0 * standard_normal(rng), 120.0 * standard_normal(rng),
                                  120.0 * standard_normal(rng));
          const double m = mass(rng);
          if (k == 0) first_mass = m;
          s.X.row(i).segment(4 * k, 4) = four_momentum(m, p).transpose();
        }
        // The invariant variant thresholds the first particle's mass instead of its energy.
        const double e1 = s.X(i, 0);
        const bool high = gen.invariant_labels ? first_mass >= 40.0 : e1 >= gen.threshold;
        s.Y(i, 0) = uniform01(rng) < (high ? 0.9 : 0.1) ? 1.0 : 0.0;
      }
      break;
    }
  }
  return s;
}

namespace detail {

/// `c e k` means c times the k-th basis vector (1-based), a bare number c
/// means c e1, and `a;b;c` lists every coordinate.
inline Vector parse_mean(const std::string& text, int d) {
  static const std::regex basis(R"(^\s*([-+]?[0-9]*\.?[0-9]+)\s*e\s*([0-9]+)\s*$)");
  std::smatch m;
  Vector mu = Vector::Zero(d);
  if (std::regex_match(text, m, basis)) {
    const int k = parse_int(m[2].str(), "basis index");
    require(k >= 1 && k <= d, Errc::InvalidDescriptor, "basis index out of range in mean '" + text + "'");
    mu(k - 1) = parse_double(m[1].str(), "mean coefficient");
    return mu;
  }
  if (text.find(';') != std::string::npos) {
    std::vector<double> vals;
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto end = text.find(';', start);
      vals.push_back(parse_double(text.substr(start, end - start), "mean coordinate"));
      if (end == std::string::npos) break;
      start = end + 1;
    }
    require(static_cast<int>(vals.size()) == d, Errc::InvalidDescriptor, "mean vector has the wrong length");
    for (int k = 0; k < d; ++k) mu(k) = vals[static_cast<std::size_t>(k)];
    return mu;
  }
  mu(0) = parse_double(text, "mean");
  return mu;
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline Generator Generator::parse(std::string_view text) {
  const Descriptor desc = parse_descriptor(text);
  Generator g;
  auto dim = [&](int fallback) {
    const auto v = desc.get("d");
    if (v) return parse_int(*v, "dimension");
    if (!desc.positional.empty()) return parse_int(desc.positional[0], "dimension");
    return fallback;
  };
  const std::string& name = desc.name;
  if (name == "gauss-iso") {
    g.kind = GeneratorKind::GaussianIso;
    g.d = dim(2);
  } else if (name == "gauss-mean") {
    g.kind = GeneratorKind::GaussianMean;
    g.d = dim(2);
    g.mu = detail::parse_mean(desc.get("mu").value_or("0.4e1"), g.d);
  } else if (name == "wishart") {
    g.kind = GeneratorKind::WishartCov;
    g.d = dim(2);
  } else if (name == "exch-plus") {
    g.kind = GeneratorKind::ExchPlus;
    g.d = dim(10);
  } else if (name == "exch-minus") {
    g.kind = GeneratorKind::ExchMinus;
    g.d = dim(10);
  } else if (name == "vmf") {
    g.kind = GeneratorKind::VmfRotated;
    g.d = dim(3);
    g.kappa = parse_double(desc.get("kappa").value_or("1"), "kappa");
    require(g.kappa >= 0.0, Errc::BadParameters, "vMF concentration must be non-negative");
    g.xi = Vector::Unit(g.d, 0);
    if (auto xi = desc.get("xi")) {
      g.xi = detail::parse_mean(*xi, g.d);
      require(g.xi.norm() > 0.0, Errc::BadParameters, "vMF mean direction must be nonzero");
      g.xi.normalize();
    }
  } else if (name == "cond-shift") {
    g.kind = GeneratorKind::CondGaussShift;
    g.d = dim(2);
  } else if (name == "cond-abs") {
    g.kind = GeneratorKind::CondGaussAbs;
    g.d = dim(2);
  } else if (name == "cond-proj") {
    g.kind = GeneratorKind::CondGaussProj;
    g.d = dim(2);
  } else if (name == "top-quark" || name == "top-quark-h0") {
    g.kind = GeneratorKind::TopQuarkLabel;
    g.particles = parse_int(desc.get("particles").value_or("2"), "particles");
    require(g.particles >= 1, Errc::BadParameters, "need at least one particle");
    g.d = 4 * g.particles;
    g.threshold = parse_double(desc.get("threshold").value_or("200"), "threshold");
    g.invariant_labels = name == "top-quark-h0";
  } else {
    throw Error(Errc::InvalidDescriptor, "unknown generator '" + std::string(text) + "'");
  }
  require(g.d >= 1, Errc::BadParameters, "dimension must be positive");
  return g;
}

inline std::string Generator::descriptor() const {
  const std::string dd = "d=" + std::to_string(d);
  switch (kind) {
    case GeneratorKind::GaussianIso: return "gauss-iso(" + dd + ")";
    case GeneratorKind::GaussianMean: {
      std::string m;
      for (Eigen::Index k = 0; k < mu.size(); ++k) m += (k ? ";" : "") + detail::format_double(mu(k));
      return "gauss-mean(" + dd + ",mu=" + m + ")";
    }
    case GeneratorKind::GaussianCov: return "gauss-cov(" + dd + ")";
    case GeneratorKind::WishartCov: return "wishart(" + dd + ")";
    case GeneratorKind::ExchPlus: return "exch-plus(" + dd + ")";
    case GeneratorKind::ExchMinus: return "exch-minus(" + dd + ")";
    case GeneratorKind::VmfRotated: {
      std::string out = "vmf(" + dd + ",kappa=" + detail::format_double(kappa);
      if (xi.size() == d && xi != Vector(Vector::Unit(d, 0))) {
        out += ",xi=";
        for (Eigen::Index k = 0; k < xi.size(); ++k) out += (k ? ";" : "") + detail::format_double(xi(k));
      }
      return out + ")";
    }
    case GeneratorKind::CondGaussShift: return "cond-shift(" + dd + ")";
    case GeneratorKind::CondGaussAbs: return "cond-abs(" + dd + ")";
    case GeneratorKind::CondGaussProj: return "cond-proj(" + dd + ")";
    case GeneratorKind::TopQuarkLabel:
      return std::string(invariant_labels ? "top-quark-h0" : "top-quark") + "(particles=" + std::to_string(particles) +
             ",threshold=" + detail::format_double(threshold) + ")";
  }
  return "unknown";
}

}  // namespace symtest
