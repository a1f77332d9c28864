#pragma once

// Synthetic test signals (spline trend + harmonic periodic part + Gaussian
// noise) and spectral comparison of trend bases against the periodic signal.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "vpfit/basis.hpp"
#include "vpfit/dft.hpp"
#include "vpfit/error.hpp"

namespace vpfit {

struct SyntheticSpec {
  int n_samples = 1024;
  SplineSpec sspec;
  std::vector<double> beta_true;
  double omega_true = 1.0;
  std::vector<std::pair<double, double>> harmonic_amplitudes;  // (sin, cos) per harmonic
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct SyntheticDataset {
  Vector x;
  Vector y;
  Vector trend;     // B_s beta_true
  Vector periodic;  // B_p alpha_true
  Vector noise;
};

/// Standard normal deviates from std::mt19937_64 through the Box-Muller
/// transform (both outputs of each pair are used). The engine is fully
/// specified by the standard, so streams are reproducible across toolchains.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * scale;  // (0, 1]
    const double u2 = static_cast<double>(engine_() >> 11) * scale;          // [0, 1)
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// x_i = i / n for i = 0..n-1: n uniform samples of the unit window, so the
/// DFT bin k sits at exactly k cycles per unit.
inline Vector unit_window_grid(int n_samples) {
  Vector x(n_samples);
  for (int i = 0; i < n_samples; ++i) x(i) = static_cast<double>(i) / n_samples;
  return x;
}

inline void validate(const SyntheticSpec& spec) {
  validate(spec.sspec);
  if (spec.n_samples < 2) throw Error(ErrorKind::InvalidSpec, "n_samples must be >= 2");
  if (static_cast<Eigen::Index>(spec.beta_true.size()) != spec.sspec.dimension())
    throw Error(ErrorKind::InvalidSpec, "beta_true has " + std::to_string(spec.beta_true.size()) +
                                            " entries but the spline space has dimension " +
                                            std::to_string(spec.sspec.dimension()));
  if (spec.harmonic_amplitudes.empty()) throw Error(ErrorKind::InvalidSpec, "need at least one harmonic amplitude pair");
  if (!(spec.omega_true > 0.0)) throw Error(ErrorKind::InvalidSpec, "omega_true must be positive");
  if (!(spec.noise_sigma >= 0.0)) throw Error(ErrorKind::InvalidSpec, "noise_sigma must be non-negative");
  if (spec.sspec.lower() > 0.0 || spec.sspec.upper() < 1.0 - 1.0 / spec.n_samples)
    throw Error(ErrorKind::InvalidSpec, "breakpoints must cover the unit window [0, 1)");
}

inline SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
  validate(spec);
  SyntheticDataset out;
  out.x = unit_window_grid(spec.n_samples);
  const Vector beta = Eigen::Map<const Vector>(spec.beta_true.data(), static_cast<Eigen::Index>(spec.beta_true.size()));
  out.trend = bspline_basis(out.x, spec.sspec).values * beta;

  const int nu = static_cast<int>(spec.harmonic_amplitudes.size());
  Vector alpha(2 * nu);
  for (int k = 0; k < nu; ++k) {
    alpha(2 * k) = spec.harmonic_amplitudes[static_cast<std::size_t>(k)].first;
    alpha(2 * k + 1) = spec.harmonic_amplitudes[static_cast<std::size_t>(k)].second;
  }
  out.periodic = harmonic_basis(out.x, {spec.omega_true, nu}).values * alpha;

  out.noise = Vector::Zero(spec.n_samples);
  if (spec.noise_sigma > 0.0) {
    GaussianStream gauss(spec.seed);
    for (int i = 0; i < spec.n_samples; ++i) out.noise(i) = spec.noise_sigma * gauss.next();
  }
  out.y = out.trend + out.periodic + out.noise;
  return out;
}

/// The unit-window synthetic configuration: quadratic spline on five uniform
/// breakpoints, base frequency 36.96 rad/unit with two further harmonics.
/// Trend roughly within [-1.1, 1.6], unit-order periodic part.
inline SyntheticSpec reference_preset(std::uint64_t seed = 1, double noise_sigma = 0.05, int n_samples = 1024) {
  SyntheticSpec spec;
  spec.n_samples = n_samples;
  spec.sspec = {2, uniform_breakpoints(0.0, 1.0, 5)};
  spec.beta_true = {0.2, 1.8, 1.2, -1.4, -0.6, 1.0};
  spec.omega_true = 36.96;
  spec.harmonic_amplitudes = {{1.0, 0.25}, {0.35, -0.2}, {0.12, 0.08}};
  spec.noise_sigma = noise_sigma;
  spec.seed = seed;
  return spec;
}

/// Columns x^0..x^max_degree on n uniform points spanning [-1, 1].
inline BasisMatrix monomial_vandermonde(int n_samples, int max_degree) {
  if (max_degree < 0) throw Error(ErrorKind::InvalidArgument, "max_degree must be >= 0");
  if (n_samples < max_degree + 1)
    throw Error(ErrorKind::InsufficientData, "need at least max_degree + 1 samples for a Vandermonde matrix");
  BasisMatrix out;
  out.values.resize(n_samples, max_degree + 1);
  for (int i = 0; i < n_samples; ++i) {
    const double xi = n_samples == 1 ? -1.0 : -1.0 + 2.0 * i / (n_samples - 1);
    double power = 1.0;
    for (int j = 0; j <= max_degree; ++j) {
      out.values(i, j) = power;
      power *= xi;
    }
  }
  for (int j = 0; j <= max_degree; ++j) out.labels.push_back({BasisFamily::Monomial, j + 1, false});
  return out;
}

/// Per-column one-sided DFT magnitudes divided by the column 2-norm.
/// magnitudes(k, j) = |sum_i B(i, j) exp(-2 pi i k i / n)| / ||B(:, j)||_2,
/// frequencies(k) = k * sample_rate / n. Zero columns give a zero spectrum.
struct SpectrumReport {
  Vector frequencies;
  Matrix magnitudes;
  std::vector<ColumnLabel> labels;
  static constexpr const char* normalization =
      "unnormalized DFT X_k = sum_i v_i exp(-2*pi*i*k*i/n), one-sided bins 0..n/2, divided by the column 2-norm";
};

inline SpectrumReport basis_spectra(const BasisMatrix& B, double sample_rate) {
  if (B.rows() == 0 || B.cols() == 0) throw Error(ErrorKind::InvalidArgument, "basis is empty");
  if (!B.values.allFinite()) throw Error(ErrorKind::InvalidArgument, "basis contains non-finite values");
  if (!(sample_rate > 0.0)) throw Error(ErrorKind::InvalidArgument, "sample_rate must be positive");
  if (B.labels.size() != static_cast<std::size_t>(B.cols()))
    throw Error(ErrorKind::DimensionMismatch, "basis has " + std::to_string(B.cols()) + " columns but " +
                                                  std::to_string(B.labels.size()) + " labels");
  const Eigen::Index n = B.rows();
  const Eigen::Index bins = n / 2 + 1;
  SpectrumReport out;
  out.labels = B.labels;
  out.frequencies.resize(bins);
  for (Eigen::Index k = 0; k < bins; ++k) out.frequencies(k) = static_cast<double>(k) * sample_rate / static_cast<double>(n);
  out.magnitudes = Matrix::Zero(bins, B.cols());
  for (Eigen::Index j = 0; j < B.cols(); ++j) {
    const double norm = B.values.col(j).norm();
    if (norm == 0.0) continue;
    out.magnitudes.col(j) = one_sided_magnitudes(B.values.col(j)) / norm;
  }
  return out;
}

enum class Winner { First, Second, Tie, Mixed };

inline std::string_view to_string(Winner w) {
  switch (w) {
    case Winner::First: return "first";
    case Winner::Second: return "second";
    case Winner::Tie: return "tie";
    case Winner::Mixed: return "mixed";
  }
  return "?";
}

struct InteractionRow {
  std::string family;  // "first" / "second" family name
  ColumnLabel label;
  double probe_magnitude = 0.0;       // normalized magnitude at the probe bin
  double high_frequency_energy = 0.0; // fraction of spectral energy above the cutoff
  bool compared = true;               // false for DC-only columns (constants)
};

struct InteractionReport {
  std::string first_name;
  std::string second_name;
  double probe_frequency = 0.0;  // cycles per unit
  std::size_t probe_bin = 0;
  double cutoff_frequency = 0.0;
  std::vector<InteractionRow> rows;
  Winner probe_winner = Winner::Tie;
  Winner energy_winner = Winner::Tie;
};

namespace detail {

// First wins when every compared column of `first` is strictly below every
// compared column of `second`; Tie when the sorted metric values coincide.
inline Winner decide(std::vector<double> first, std::vector<double> second) {
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  if (first.size() == second.size()) {
    bool same = true;
    for (std::size_t i = 0; i < first.size() && same; ++i)
      same = std::abs(first[i] - second[i]) <= 1e-12 * std::max(1.0, std::abs(first[i]));
    if (same) return Winner::Tie;
  }
  if (first.empty() || second.empty()) return Winner::Mixed;
  if (first.back() < second.front()) return Winner::First;
  if (second.back() < first.front()) return Winner::Second;
  return Winner::Mixed;
}

}  // namespace detail

/// Compares two bases sampled with the same number of rows and the same
/// sample rate at the bin nearest `probe_frequency` (cycles per unit) and by
/// the share of spectral energy above `cutoff_frequency`.
inline InteractionReport compare_families(const BasisMatrix& first, std::string first_name, const BasisMatrix& second,
                                          std::string second_name, double sample_rate, double probe_frequency,
                                          double cutoff_frequency) {
  if (first.rows() != second.rows())
    throw Error(ErrorKind::DimensionMismatch, "families must be sampled on the same number of points");
  if (!(probe_frequency >= 0.0) || probe_frequency > 0.5 * sample_rate)
    throw Error(ErrorKind::InvalidArgument, "probe frequency " + std::to_string(probe_frequency) +
                                                " is outside [0, Nyquist=" + std::to_string(0.5 * sample_rate) + "]");
  InteractionReport out;
  out.first_name = std::move(first_name);
  out.second_name = std::move(second_name);
  out.probe_frequency = probe_frequency;
  out.cutoff_frequency = cutoff_frequency;

  const Eigen::Index n = first.rows();
  const double bin_width = sample_rate / static_cast<double>(n);
  out.probe_bin = static_cast<std::size_t>(std::lround(probe_frequency / bin_width));

  std::vector<double> probe[2], energy[2];
  const BasisMatrix* families[2] = {&first, &second};
  const std::string* names[2] = {&out.first_name, &out.second_name};
  for (int f = 0; f < 2; ++f) {
    const auto spectra = basis_spectra(*families[f], sample_rate);
    for (Eigen::Index j = 0; j < spectra.magnitudes.cols(); ++j) {
      // Full two-sided energy; bins k and n-k share a frequency magnitude.
      double total = 0.0, high = 0.0;
      for (Eigen::Index k = 0; k < spectra.magnitudes.rows(); ++k) {
        const double m2 = spectra.magnitudes(k, j) * spectra.magnitudes(k, j);
        const bool mirrored = k > 0 && !(n % 2 == 0 && k == n / 2);
        const double weight = mirrored ? 2.0 : 1.0;
        total += weight * m2;
        if (spectra.frequencies(k) > cutoff_frequency) high += weight * m2;
      }
      InteractionRow row;
      row.family = *names[f];
      row.label = spectra.labels[static_cast<std::size_t>(j)];
      row.probe_magnitude = spectra.magnitudes(static_cast<Eigen::Index>(out.probe_bin), j);
      row.high_frequency_energy = total > 0.0 ? high / total : 0.0;
      const double dc2 = spectra.magnitudes(0, j) * spectra.magnitudes(0, j);
      row.compared = total > 0.0 && (total - dc2) > 1e-20 * total;
      if (row.compared) {
        probe[f].push_back(row.probe_magnitude);
        energy[f].push_back(row.high_frequency_energy);
      }
      out.rows.push_back(std::move(row));
    }
  }
  out.probe_winner = detail::decide(probe[0], probe[1]);
  out.energy_winner = detail::decide(energy[0], energy[1]);
  return out;
}

/// Clamped B-splines of `sspec` on the unit-window grid of its breakpoint span
/// versus monomials x^0..x^max_degree on [-1, 1], both with n_samples rows and
/// sample rate n / (span length), probed at omega_probe / (2 pi).
inline InteractionReport interaction_report(const SplineSpec& sspec, int max_degree, double omega_probe,
                                            int n_samples = 1024, double cutoff_frequency = 10.0) {
  validate(sspec);
  const double span = sspec.upper() - sspec.lower();
  Vector x(n_samples);
  for (int i = 0; i < n_samples; ++i) x(i) = sspec.lower() + span * i / n_samples;
  const double sample_rate = n_samples / span;
  return compare_families(bspline_basis(x, sspec), "bspline", monomial_vandermonde(n_samples, max_degree), "monomial",
                          sample_rate, omega_probe / (2.0 * std::numbers::pi), cutoff_frequency);
}

}  // namespace vpfit
