#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "earkey/common.hpp"

namespace earkey::dsp {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Single DFT bin of a real sequence, X_k = sum_n x[n] e^{-i 2 pi k n / N}.
inline std::complex<double> dft_bin(std::span<const double> x, int k) {
  const int n = static_cast<int>(x.size());
  double re = 0.0, im = 0.0;
  const double w = -kTwoPi * k / n;
  for (int i = 0; i < n; ++i) {
    re += x[i] * std::cos(w * i);
    im += x[i] * std::sin(w * i);
  }
  return {re, im};
}

// Precomputed DFT over a fixed set of bins of length-n inputs. The twiddle
// tables turn each evaluation into two GEMVs, which is what keeps repeated
// symbol-spectrum probes cheap.
class BandDft {
 public:
  BandDft(int n, std::vector<int> bins) : n_(n), bins_(std::move(bins)) {
    const int b = static_cast<int>(bins_.size());
    cos_.resize(b, n_);
    sin_.resize(b, n_);
    for (int r = 0; r < b; ++r) {
      const double w = -kTwoPi * bins_[r] / n_;
      for (int c = 0; c < n_; ++c) {
        cos_(r, c) = std::cos(w * c);
        sin_(r, c) = std::sin(w * c);
      }
    }
  }

  int length() const { return n_; }
  const std::vector<int>& bins() const { return bins_; }

  Eigen::VectorXcd operator()(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != n_)
      throw ConfigError("BandDft: input length mismatch");
    Eigen::Map<const Eigen::VectorXd> v(x.data(), n_);
    Eigen::VectorXd re = cos_ * v;
    Eigen::VectorXd im = sin_ * v;
    Eigen::VectorXcd out(re.size());
    out.real() = re;
    out.imag() = im;
    return out;
  }

 private:
  int n_;
  std::vector<int> bins_;
  Eigen::MatrixXd cos_, sin_;
};

// Power spectrum |X_k|^2 for k = 0..n/2 of real frames, with the same
// table-driven evaluation.
class RealDft {
 public:
  explicit RealDft(int n) : n_(n), half_(n / 2 + 1) {
    cos_.resize(half_, n_);
    sin_.resize(half_, n_);
    for (int k = 0; k < half_; ++k) {
      const double w = -kTwoPi * k / n_;
      for (int c = 0; c < n_; ++c) {
        cos_(k, c) = std::cos(w * c);
        sin_(k, c) = std::sin(w * c);
      }
    }
  }

  int num_bins() const { return half_; }

  Eigen::VectorXd power(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != n_)
      throw ConfigError("RealDft: input length mismatch");
    Eigen::Map<const Eigen::VectorXd> v(x.data(), n_);
    Eigen::VectorXd re = cos_ * v;
    Eigen::VectorXd im = sin_ * v;
    return re.array().square() + im.array().square();
  }

 private:
  int n_, half_;
  Eigen::MatrixXd cos_, sin_;
};

inline double wrap_phase(double p) {
  while (p > kPi) p -= kTwoPi;
  while (p < -kPi) p += kTwoPi;
  return p;
}

}  // namespace earkey::dsp
