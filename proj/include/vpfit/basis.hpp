#pragma once

// Basis matrices for the signal model y = B_p(x, omega, nu) alpha + B_s(x, delta, kappa) beta.
//
// The trend basis uses clamped B-splines over a strictly increasing breakpoint
// sequence; the periodic basis stacks sin/cos pairs of the base frequency and
// its harmonics. Both are evaluated densely, one row per sample.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vpfit/error.hpp"

namespace vpfit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct SplineSpec {
  int degree = 0;
  std::vector<double> breakpoints;

  /// Number of clamped B-spline functions: len(breakpoints) + degree - 1.
  Eigen::Index dimension() const { return static_cast<Eigen::Index>(breakpoints.size()) + degree - 1; }
  double lower() const { return breakpoints.front(); }
  double upper() const { return breakpoints.back(); }
};

struct HarmonicSpec {
  double omega = 1.0;  // rad per unit of x
  int harmonics = 1;

  Eigen::Index dimension() const { return 2 * static_cast<Eigen::Index>(harmonics); }
};

enum class BasisFamily { Harmonic, Spline, Monomial };

/// Origin of one basis column. For harmonic columns `index` is the harmonic
/// number k (1-based) and `cosine` selects the cos(k omega x) member of the pair;
/// for spline and monomial columns `index` is the 1-based function number
/// (monomials: degree + 1).
struct ColumnLabel {
  BasisFamily family = BasisFamily::Spline;
  int index = 1;
  bool cosine = false;

  friend bool operator==(const ColumnLabel&, const ColumnLabel&) = default;

  std::string name() const {
    switch (family) {
      case BasisFamily::Harmonic: return (cosine ? "cos" : "sin") + std::to_string(index);
      case BasisFamily::Spline: return "beta" + std::to_string(index);
      case BasisFamily::Monomial: return "x^" + std::to_string(index - 1);
    }
    return "?";
  }
};

struct BasisMatrix {
  Matrix values;
  std::vector<ColumnLabel> labels;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }

  /// Columns whose label belongs to `family`, in their original order.
  BasisMatrix select(BasisFamily family) const {
    std::vector<Eigen::Index> keep;
    for (std::size_t j = 0; j < labels.size(); ++j)
      if (labels[j].family == family) keep.push_back(static_cast<Eigen::Index>(j));
    BasisMatrix out;
    out.values.resize(values.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) {
      out.values.col(static_cast<Eigen::Index>(j)) = values.col(keep[j]);
      out.labels.push_back(labels[static_cast<std::size_t>(keep[j])]);
    }
    return out;
  }
};

inline void validate(const SplineSpec& spec) {
  if (spec.degree < 0) throw Error(ErrorKind::InvalidSpec, "spline degree must be >= 0, got " + std::to_string(spec.degree));
  if (spec.breakpoints.size() < 2)
    throw Error(ErrorKind::InvalidSpec, "need at least 2 breakpoints, got " + std::to_string(spec.breakpoints.size()));
  for (std::size_t i = 0; i < spec.breakpoints.size(); ++i) {
    if (!std::isfinite(spec.breakpoints[i]))
      throw Error(ErrorKind::InvalidSpec, "breakpoint " + std::to_string(i) + " is not finite");
    if (i > 0 && !(spec.breakpoints[i] > spec.breakpoints[i - 1]))
      throw Error(ErrorKind::InvalidSpec, "breakpoints must be strictly increasing (index " + std::to_string(i) + ")");
  }
}

inline void validate(const HarmonicSpec& spec) {
  if (!(spec.omega > 0.0) || !std::isfinite(spec.omega))
    throw Error(ErrorKind::InvalidSpec, "omega must be positive and finite, got " + std::to_string(spec.omega));
  if (spec.harmonics < 1)
    throw Error(ErrorKind::InvalidSpec, "harmonic count must be >= 1, got " + std::to_string(spec.harmonics));
}

/// Breakpoints with both ends repeated to multiplicity degree + 1.
inline std::vector<double> clamped_knot_vector(const SplineSpec& spec) {
  validate(spec);
  std::vector<double> knots;
  knots.reserve(spec.breakpoints.size() + 2 * static_cast<std::size_t>(spec.degree));
  knots.insert(knots.end(), static_cast<std::size_t>(spec.degree), spec.lower());
  knots.insert(knots.end(), spec.breakpoints.begin(), spec.breakpoints.end());
  knots.insert(knots.end(), static_cast<std::size_t>(spec.degree), spec.upper());
  return knots;
}

namespace detail {

// Knot span i with knots[i] <= x < knots[i+1]; the final breakpoint belongs to
// the last non-empty span so the right end is closed.
inline Eigen::Index find_span(const std::vector<double>& knots, int degree, Eigen::Index n_basis, double x) {
  if (x >= knots[static_cast<std::size_t>(n_basis)]) return n_basis - 1;
  const auto first = knots.begin() + degree;
  const auto last = knots.begin() + n_basis + 1;
  const auto it = std::upper_bound(first, last, x);
  return static_cast<Eigen::Index>(it - knots.begin()) - 1;
}

// Cox-de Boor triangle for the degree+1 functions that are non-zero on `span`.
inline void nonzero_basis(const std::vector<double>& knots, int degree, Eigen::Index span, double x,
                          std::vector<double>& out, std::vector<double>& left, std::vector<double>& right) {
  const auto p = static_cast<std::size_t>(degree);
  const auto i = static_cast<std::size_t>(span);
  out.assign(p + 1, 0.0);
  left.assign(p + 1, 0.0);
  right.assign(p + 1, 0.0);
  out[0] = 1.0;
  for (std::size_t j = 1; j <= p; ++j) {
    left[j] = x - knots[i + 1 - j];
    right[j] = knots[i + j] - x;
    double saved = 0.0;
    for (std::size_t r = 0; r < j; ++r) {
      const double temp = out[r] / (right[r + 1] + left[j - r]);
      out[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out[j] = saved;
  }
}

}  // namespace detail

/// Clamped B-spline basis evaluated at every x. Throws OutOfDomain for
/// samples outside [breakpoints.front(), breakpoints.back()].
inline BasisMatrix bspline_basis(std::span<const double> x, const SplineSpec& spec) {
  const auto knots = clamped_knot_vector(spec);
  const Eigen::Index n_basis = spec.dimension();
  BasisMatrix out;
  out.values = Matrix::Zero(static_cast<Eigen::Index>(x.size()), n_basis);
  out.labels.reserve(static_cast<std::size_t>(n_basis));
  for (Eigen::Index j = 0; j < n_basis; ++j) out.labels.push_back({BasisFamily::Spline, static_cast<int>(j + 1), false});

  std::vector<double> local, left, right;
  for (std::size_t row = 0; row < x.size(); ++row) {
    const double xi = x[row];
    if (!(xi >= spec.lower() && xi <= spec.upper()))
      throw Error(ErrorKind::OutOfDomain, "sample " + std::to_string(row) + " at x=" + std::to_string(xi) +
                                              " lies outside the breakpoint span [" + std::to_string(spec.lower()) +
                                              ", " + std::to_string(spec.upper()) + "]");
    const Eigen::Index span = detail::find_span(knots, spec.degree, n_basis, xi);
    detail::nonzero_basis(knots, spec.degree, span, xi, local, left, right);
    for (int r = 0; r <= spec.degree; ++r)
      out.values(static_cast<Eigen::Index>(row), span - spec.degree + r) = local[static_cast<std::size_t>(r)];
  }
  return out;
}

inline BasisMatrix bspline_basis(const Vector& x, const SplineSpec& spec) {
  return bspline_basis(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), spec);
}

/// Columns [sin(k omega x), cos(k omega x)] for k = 1..harmonics.
inline BasisMatrix harmonic_basis(std::span<const double> x, const HarmonicSpec& spec) {
  validate(spec);
  BasisMatrix out;
  out.values.resize(static_cast<Eigen::Index>(x.size()), spec.dimension());
  for (int k = 1; k <= spec.harmonics; ++k) {
    const Eigen::Index col = 2 * (k - 1);
    const double w = k * spec.omega;
    for (std::size_t row = 0; row < x.size(); ++row) {
      const double phase = w * x[row];
      out.values(static_cast<Eigen::Index>(row), col) = std::sin(phase);
      out.values(static_cast<Eigen::Index>(row), col + 1) = std::cos(phase);
    }
    out.labels.push_back({BasisFamily::Harmonic, k, false});
    out.labels.push_back({BasisFamily::Harmonic, k, true});
  }
  return out;
}

inline BasisMatrix harmonic_basis(const Vector& x, const HarmonicSpec& spec) {
  return harmonic_basis(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), spec);
}

/// Horizontal concatenation [left | right], labels preserved.
inline BasisMatrix concatenate(const BasisMatrix& left, const BasisMatrix& right) {
  if (left.rows() != right.rows())
    throw Error(ErrorKind::DimensionMismatch, "cannot concatenate bases with " + std::to_string(left.rows()) + " and " +
                                                  std::to_string(right.rows()) + " rows");
  BasisMatrix out;
  out.values.resize(left.rows(), left.cols() + right.cols());
  out.values << left.values, right.values;
  out.labels = left.labels;
  out.labels.insert(out.labels.end(), right.labels.begin(), right.labels.end());
  return out;
}

/// B(omega) = [B_p | B_s].
inline BasisMatrix assemble_basis(std::span<const double> x, const HarmonicSpec& hspec, const SplineSpec& sspec) {
  return concatenate(harmonic_basis(x, hspec), bspline_basis(x, sspec));
}

inline BasisMatrix assemble_basis(const Vector& x, const HarmonicSpec& hspec, const SplineSpec& sspec) {
  return assemble_basis(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), hspec, sspec);
}

/// n uniform breakpoints from lower to upper inclusive.
inline std::vector<double> uniform_breakpoints(double lower, double upper, int count) {
  if (count < 2) throw Error(ErrorKind::InvalidSpec, "uniform breakpoint count must be >= 2");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lower + (upper - lower) * i / (count - 1);
  out.back() = upper;
  return out;
}

}  // namespace vpfit
