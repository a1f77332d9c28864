#pragma once

// End-to-end fit: spectral initial guess from a spline-only pre-fit, bracketed
// scalar minimization of the variable projection functional, then recovery of
// the linear coefficients and their covariance at the optimum.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <utility>

#include "vpfit/basis.hpp"
#include "vpfit/dft.hpp"
#include "vpfit/error.hpp"
#include "vpfit/varpro.hpp"

namespace vpfit {

struct FitConfig {
  SplineSpec sspec;
  int harmonics = 1;
  std::optional<std::pair<double, double>> omega_bounds;
  std::optional<double> omega_init_override;
  int max_iterations = 200;
  double tolerance = 1e-8;  // relative, on omega
};

inline void validate(const FitConfig& config) {
  validate(config.sspec);
  if (config.harmonics < 1) throw Error(ErrorKind::InvalidSpec, "harmonics must be >= 1");
  if (config.omega_bounds) {
    const auto [lo, hi] = *config.omega_bounds;
    if (!(lo > 0.0 && hi > lo) || !std::isfinite(hi))
      throw Error(ErrorKind::InvalidSpec, "omega bounds must satisfy 0 < lower < upper");
  }
  if (config.omega_init_override && !(*config.omega_init_override > 0.0 && std::isfinite(*config.omega_init_override)))
    throw Error(ErrorKind::InvalidSpec, "omega init override must be positive");
  if (config.max_iterations < 1) throw Error(ErrorKind::InvalidSpec, "max_iterations must be >= 1");
  if (!(config.tolerance > 0.0)) throw Error(ErrorKind::InvalidSpec, "tolerance must be > 0");
}

/// One-sided magnitude spectrum; frequencies in cycles per unit x.
struct Spectrum {
  Vector frequencies;
  Vector magnitudes;
};

struct InitialFrequency {
  double omega = 0.0;
  std::size_t peak_bin = 0;
  Spectrum residual_spectrum;
};

struct Minimization {
  double omega = 0.0;
  double cost = 0.0;
  double lower = 0.0;  // search interval actually used
  double upper = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct FitResult {
  double omega_hat = 0.0;
  double omega_init = 0.0;
  double cost = 0.0;
  Vector gamma;
  Vector alpha;
  Vector beta;
  Vector y_model;
  Vector y_periodic;
  Vector y_spline;
  Vector residual;
  CovarianceReport covariance;
  std::vector<ColumnLabel> labels;
  int iterations = 0;
  bool converged = false;
};

/// Amplitude a = |(s, c)| and phase atan2(c, s) of one harmonic, so that
/// s sin(t) + c cos(t) = a sin(t + phase). `amplitude_se` is first-order
/// propagation of the 2x2 covariance block.
struct HarmonicComponent {
  int harmonic = 1;
  double amplitude = 0.0;
  double phase = 0.0;
  double amplitude_se = 0.0;
};

inline std::vector<HarmonicComponent> harmonic_components(const Vector& alpha, const Matrix& alpha_cov) {
  std::vector<HarmonicComponent> out;
  for (Eigen::Index k = 0; 2 * k + 1 < alpha.size(); ++k) {
    const double s = alpha(2 * k);
    const double c = alpha(2 * k + 1);
    HarmonicComponent h;
    h.harmonic = static_cast<int>(k + 1);
    h.amplitude = std::hypot(s, c);
    h.phase = std::atan2(c, s);
    double var = 0.0;
    if (h.amplitude > 0.0) {
      const double gs = s / h.amplitude, gc = c / h.amplitude;
      var = gs * gs * alpha_cov(2 * k, 2 * k) + 2 * gs * gc * alpha_cov(2 * k, 2 * k + 1) +
            gc * gc * alpha_cov(2 * k + 1, 2 * k + 1);
    } else {
      var = 0.5 * (alpha_cov(2 * k, 2 * k) + alpha_cov(2 * k + 1, 2 * k + 1));
    }
    h.amplitude_se = std::sqrt(std::max(var, 0.0));
    out.push_back(h);
  }
  return out;
}

namespace detail {

// Sample spacing of uniformly sampled x; throws if the grid is not uniform.
inline double uniform_spacing(const Vector& x) {
  if (x.size() < 2) throw Error(ErrorKind::InsufficientData, "need at least two samples");
  const double dx = (x(x.size() - 1) - x(0)) / static_cast<double>(x.size() - 1);
  if (!(dx > 0.0) || !std::isfinite(dx)) throw Error(ErrorKind::InvalidArgument, "x must be strictly increasing");
  for (Eigen::Index i = 1; i < x.size(); ++i) {
    const double step = x(i) - x(i - 1);
    if (std::abs(step - dx) > 1e-6 * dx)
      throw Error(ErrorKind::NonUniformSampling,
                  "sample spacing at index " + std::to_string(i) +
                      " deviates from the mean spacing by more than 1e-6 relative; resample onto a uniform grid first");
  }
  return dx;
}

}  // namespace detail

/// Frequency of the strongest non-DC bin of the spline pre-fit residual.
inline InitialFrequency initial_frequency(const Vector& x, const Vector& y, const SplineSpec& sspec) {
  if (x.size() != y.size())
    throw Error(ErrorKind::DimensionMismatch, "x and y lengths differ");
  validate(sspec);
  if (y.size() < 2 * sspec.dimension())
    throw Error(ErrorKind::InsufficientData, std::to_string(y.size()) + " samples are fewer than twice the " +
                                                 std::to_string(sspec.dimension()) + " spline functions");
  const double dx = detail::uniform_spacing(x);
  const Vector residual = y - project(bspline_basis(x, sspec), y);

  InitialFrequency out;
  out.residual_spectrum.magnitudes = one_sided_magnitudes(residual);
  const Eigen::Index bins = out.residual_spectrum.magnitudes.size();
  const double window = dx * static_cast<double>(x.size());
  out.residual_spectrum.frequencies.resize(bins);
  for (Eigen::Index k = 0; k < bins; ++k) out.residual_spectrum.frequencies(k) = static_cast<double>(k) / window;

  // On an even-length grid the Nyquist sine samples to zero, so that bin is skipped.
  const Eigen::Index searchable = x.size() % 2 == 0 ? bins - 2 : bins - 1;
  if (searchable < 1) throw Error(ErrorKind::InsufficientData, "too few samples for a frequency search");
  Eigen::Index peak = 1;
  out.residual_spectrum.magnitudes.segment(1, searchable).maxCoeff(&peak);
  peak += 1;
  if (out.residual_spectrum.magnitudes(peak) < 1e-12 * y.norm())
    throw Error(ErrorKind::NoPeriodicity, "spline pre-fit residual has no spectral content above DC");
  out.peak_bin = static_cast<std::size_t>(peak);
  out.omega = 2.0 * std::numbers::pi * out.residual_spectrum.frequencies(peak);
  return out;
}

struct BrentResult {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Brent's parabolic/golden-section minimizer on [lower, upper] started from
/// the interior point `start`. Stops when the bracket around the best point is
/// narrower than 2 * (rel_tol * |x| + tiny).
inline BrentResult brent_minimize(const std::function<double(double)>& f, double lower, double upper, double start,
                                  double rel_tol, int max_iterations) {
  constexpr double golden = 0.3819660112501051;  // (3 - sqrt(5)) / 2
  constexpr double tiny = 1e-300;
  double a = lower, b = upper;
  double x = start, w = start, v = start;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;

  BrentResult out;
  for (int iter = 1; iter <= max_iterations; ++iter) {
    const double xm = 0.5 * (a + b);
    const double tol1 = rel_tol * std::abs(x) + tiny;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - xm) <= tol2 - 0.5 * (b - a)) {
      out.converged = true;
      out.iterations = iter - 1;
      break;
    }
    bool golden_step = true;
    if (std::abs(e) > tol1) {
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_prev = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = std::copysign(tol1, xm - x);
        golden_step = false;
      }
    }
    if (golden_step) {
      e = (x >= xm) ? a - x : b - x;
      d = golden * e;
    }
    const double u = (std::abs(d) >= tol1) ? x + d : x + std::copysign(tol1, d);
    const double fu = f(u);
    if (fu <= fx) {
      if (u >= x) a = x; else b = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
    out.iterations = iter;
  }
  out.x = x;
  out.fx = fx;
  return out;
}

/// Local minimizer of E(omega) in a bracket of one DFT bin around omega_init
/// (or inside config.omega_bounds when given).
inline Minimization minimize_vpf(const VpfObjective& objective, const FitConfig& config, double omega_init) {
  validate(config);
  if (!(omega_init > 0.0) || !std::isfinite(omega_init))
    throw Error(ErrorKind::InvalidArgument, "omega_init must be positive and finite");

  auto cost = [&](double omega) {
    const double value = objective(omega);
    if (!std::isfinite(value))
      throw Error(ErrorKind::CostEvaluation, "cost is not finite at omega=" + std::to_string(omega));
    return value;
  };

  double lower = 0.0, upper = 0.0, start = omega_init;
  if (config.omega_bounds) {
    std::tie(lower, upper) = *config.omega_bounds;
    if (!(start > lower && start < upper)) start = 0.5 * (lower + upper);
  } else {
    const double dx = detail::uniform_spacing(objective.x());
    const double bin = 2.0 * std::numbers::pi / (dx * static_cast<double>(objective.x().size()));
    const double flat = 1e-13 * objective.y().squaredNorm();
    const double f_mid = cost(omega_init);
    bool bracketed = false;
    for (int attempt = 0; attempt < 2 && !bracketed; ++attempt) {
      const double delta = bin * (attempt == 0 ? 1.0 : 2.0);
      lower = std::max(omega_init - delta, 0.5 * omega_init);
      upper = omega_init + delta;
      const bool lower_below = cost(lower) < f_mid - flat;
      const bool upper_below = cost(upper) < f_mid - flat;
      bracketed = !(lower_below && upper_below);
    }
    if (!bracketed)
      throw Error(ErrorKind::NoInteriorMinimum, "both bracket ends [" + std::to_string(lower) + ", " +
                                                    std::to_string(upper) + "] are below the cost at omega_init=" +
                                                    std::to_string(omega_init) + " after one expansion");
  }

  const auto found = brent_minimize(cost, lower, upper, start, config.tolerance, config.max_iterations);
  return {found.x, found.fx, lower, upper, found.iterations, found.converged};
}

inline Minimization minimize_vpf(const Vector& x, const Vector& y, const FitConfig& config, double omega_init) {
  return minimize_vpf(VpfObjective(x, y, config.harmonics, config.sspec), config, omega_init);
}

namespace detail {

template <class F>
auto run_stage(std::string_view stage, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw e.with_stage(stage);
  }
}

}  // namespace detail

inline FitResult fit(const Vector& x, const Vector& y, const FitConfig& config) {
  detail::run_stage("config", [&] {
    validate(config);
    if (x.size() != y.size()) throw Error(ErrorKind::DimensionMismatch, "x and y lengths differ");
    return 0;
  });

  FitResult out;
  out.omega_init = config.omega_init_override
                       ? *config.omega_init_override
                       : detail::run_stage("initial_frequency", [&] { return initial_frequency(x, y, config.sspec).omega; });

  const auto objective =
      detail::run_stage("minimize_vpf", [&] { return VpfObjective(x, y, config.harmonics, config.sspec); });
  const auto found = detail::run_stage("minimize_vpf", [&] { return minimize_vpf(objective, config, out.omega_init); });
  out.omega_hat = found.omega;
  out.iterations = found.iterations;
  out.converged = found.converged;

  const BasisMatrix B = objective.basis(out.omega_hat);
  const auto solution = detail::run_stage("solve_linear", [&] { return solve_linear(B, y); });
  out.gamma = solution.gamma;
  out.labels = B.labels;

  const Eigen::Index n_alpha = 2 * config.harmonics;
  out.alpha = out.gamma.head(n_alpha);
  out.beta = out.gamma.tail(out.gamma.size() - n_alpha);
  out.y_periodic = B.select(BasisFamily::Harmonic).values * out.alpha;
  out.y_spline = B.select(BasisFamily::Spline).values * out.beta;
  out.y_model = out.y_periodic + out.y_spline;
  out.residual = y - out.y_model;
  out.cost = out.residual.squaredNorm();

  out.covariance = detail::run_stage("covariance", [&] {
    const auto noise = estimate_sigma2(out.residual, static_cast<int>(out.gamma.size()));
    auto report = covariance(B, noise.sigma2);
    report.n_df = noise.n_df;
    return report;
  });
  return out;
}

}  // namespace vpfit
