#pragma once

// Unnormalized DFT, X_k = sum_i v_i exp(-2 pi i k i / n), via Eigen's FFT module.

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <complex>
#include <vector>

namespace vpfit {

/// |X_k| for k = 0..n-1.
inline Eigen::VectorXd dft_magnitudes(const Eigen::VectorXd& v) {
  Eigen::FFT<double> fft;
  std::vector<double> in(v.data(), v.data() + v.size());
  std::vector<std::complex<double>> out;
  fft.fwd(out, in);
  Eigen::VectorXd mag(static_cast<Eigen::Index>(out.size()));
  for (std::size_t k = 0; k < out.size(); ++k) mag(static_cast<Eigen::Index>(k)) = std::abs(out[k]);
  return mag;
}

/// Bins 0..floor(n/2) of a real signal's magnitude spectrum.
inline Eigen::VectorXd one_sided_magnitudes(const Eigen::VectorXd& v) {
  return dft_magnitudes(v).head(v.size() / 2 + 1);
}

}  // namespace vpfit
