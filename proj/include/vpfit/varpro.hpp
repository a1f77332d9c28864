#pragma once

// Linear part of the separable problem: least squares in the coefficients,
// the variable projection functional E(omega) = ||y - B(omega) B(omega)^+ y||^2,
// and covariance propagation for the linear coefficients.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "vpfit/basis.hpp"
#include "vpfit/error.hpp"

namespace vpfit {

struct LinearSolution {
  Vector gamma;
  Vector model;
  Vector residual;
};

struct NoiseEstimate {
  double sigma2 = 0.0;
  int n_df = 0;
};

struct CovarianceReport {
  double sigma2 = 0.0;
  int n_df = 0;
  Matrix covariance;

  Vector standard_errors() const { return covariance.diagonal().cwiseMax(0.0).cwiseSqrt(); }
};

namespace detail {

inline void check_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw Error(ErrorKind::InvalidArgument, std::string(what) + " contains non-finite values");
}

inline void check_shapes(const Matrix& B, const Vector& y) {
  if (B.rows() != y.size())
    throw Error(ErrorKind::DimensionMismatch, "basis has " + std::to_string(B.rows()) + " rows but y has " +
                                                  std::to_string(y.size()) + " entries");
  if (B.rows() < B.cols())
    throw Error(ErrorKind::InsufficientData, "basis has more columns (" + std::to_string(B.cols()) + ") than rows (" +
                                                 std::to_string(B.rows()) + ")");
  if (B.cols() == 0) throw Error(ErrorKind::DimensionMismatch, "basis has no columns");
}

// Thin SVD with the rank decision sv < sv_max * rows * eps.
inline Eigen::JacobiSVD<Matrix> full_rank_svd(const BasisMatrix& B) {
  if (!B.values.allFinite()) throw Error(ErrorKind::InvalidArgument, "basis contains non-finite values");
  Eigen::JacobiSVD<Matrix> svd(B.values, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double threshold = sv(0) * static_cast<double>(B.rows()) * std::numeric_limits<double>::epsilon();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > threshold) ++rank;
  if (rank < B.cols()) {
    std::ostringstream msg;
    msg << "basis (" << B.rows() << "x" << B.cols() << ") is numerically rank deficient: rank " << rank
        << ", singular values [" << sv(sv.size() - 1) << " .. " << sv(0) << "], tolerance " << threshold;
    std::vector<std::string> names;
    for (const auto& label : B.labels) names.push_back(label.name());
    if (!names.empty()) {
      msg << ", columns {";
      for (std::size_t i = 0; i < names.size(); ++i) msg << (i ? "," : "") << names[i];
      msg << "}";
    }
    throw Error(ErrorKind::RankDeficient, msg.str());
  }
  return svd;
}

}  // namespace detail

/// Minimum-norm least-squares solution of B gamma ~ y.
inline LinearSolution solve_linear(const BasisMatrix& B, const Vector& y) {
  detail::check_shapes(B.values, y);
  detail::check_finite(y, "y");
  const auto svd = detail::full_rank_svd(B);
  LinearSolution out;
  out.gamma = svd.solve(y);
  out.model = B.values * out.gamma;
  out.residual = y - out.model;
  return out;
}

/// Orthogonal projection B B^+ y onto the column space of B.
inline Vector project(const BasisMatrix& B, const Vector& y) {
  detail::check_shapes(B.values, y);
  detail::check_finite(y, "y");
  const auto svd = detail::full_rank_svd(B);
  const Matrix& U = svd.matrixU();
  return U * (U.transpose() * y);
}

/// E(omega) over fixed samples, harmonic count and spline space. The spline
/// block does not depend on omega and is evaluated once.
class VpfObjective {
 public:
  VpfObjective(Vector x, Vector y, int harmonics, SplineSpec sspec)
      : x_(std::move(x)), y_(std::move(y)), harmonics_(harmonics), sspec_(std::move(sspec)) {
    if (x_.size() != y_.size())
      throw Error(ErrorKind::DimensionMismatch,
                  "x has " + std::to_string(x_.size()) + " entries but y has " + std::to_string(y_.size()));
    detail::check_finite(y_, "y");
    if (harmonics_ < 1) throw Error(ErrorKind::InvalidSpec, "harmonic count must be >= 1");
    spline_ = bspline_basis(x_, sspec_);
  }

  BasisMatrix basis(double omega) const { return concatenate(harmonic_basis(x_, {omega, harmonics_}), spline_); }

  double operator()(double omega) const {
    try {
      const Vector r = y_ - project(basis(omega), y_);
      return r.squaredNorm();
    } catch (const Error& e) {
      throw Error(e.kind(), e.detail() + " (at omega=" + format_omega(omega) + ")");
    }
  }

  const Vector& x() const { return x_; }
  const Vector& y() const { return y_; }
  int harmonics() const { return harmonics_; }
  const SplineSpec& spline_spec() const { return sspec_; }
  const BasisMatrix& spline_basis() const { return spline_; }

 private:
  static std::string format_omega(double omega) {
    std::ostringstream s;
    s.precision(17);
    s << omega;
    return s.str();
  }

  Vector x_;
  Vector y_;
  int harmonics_;
  SplineSpec sspec_;
  BasisMatrix spline_;
};

inline double vpf_cost(double omega, const Vector& x, const Vector& y, int harmonics, const SplineSpec& sspec) {
  if (!(omega > 0.0) || !std::isfinite(omega))
    throw Error(ErrorKind::InvalidArgument, "omega must be positive and finite");
  return VpfObjective(x, y, harmonics, sspec)(omega);
}

/// sigma^2 = ||r||^2 / (n - n_df) with n_df = n_linear + 1 (the +1 is omega).
inline NoiseEstimate estimate_sigma2(const Vector& residual, int n_linear) {
  if (n_linear < 1) throw Error(ErrorKind::InvalidArgument, "linear parameter count must be >= 1");
  const int n_df = n_linear + 1;
  if (residual.size() <= n_df)
    throw Error(ErrorKind::InsufficientData, std::to_string(residual.size()) + " samples do not exceed the " +
                                                 std::to_string(n_df) + " fitted parameters");
  detail::check_finite(residual, "residual");
  return {residual.squaredNorm() / static_cast<double>(residual.size() - n_df), n_df};
}

/// Lambda_gamma = sigma^2 B^+ (B^+)^T with an explicit pseudo-inverse.
inline CovarianceReport covariance(const BasisMatrix& B, double sigma2) {
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2))
    throw Error(ErrorKind::InvalidArgument, "sigma2 must be finite and non-negative");
  if (B.cols() == 0 || B.rows() < B.cols())
    throw Error(ErrorKind::InsufficientData, "covariance needs a tall basis with at least one column");
  const auto svd = detail::full_rank_svd(B);
  const Vector inv_sv = svd.singularValues().cwiseInverse();
  const Matrix pinv = svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
  Matrix cov = sigma2 * (pinv * pinv.transpose());
  cov = 0.5 * (cov + cov.transpose()).eval();
  return {sigma2, static_cast<int>(B.cols()) + 1, std::move(cov)};
}

}  // namespace vpfit
