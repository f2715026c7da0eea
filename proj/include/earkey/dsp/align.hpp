#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "earkey/common.hpp"
#include "earkey/dsp/dft.hpp"
#include "earkey/dsp/probe.hpp"

namespace earkey::dsp {

// Lag in [0, symbol_len) maximizing the normalized cross-correlation of the
// transmitted symbol against a two-symbol window at the head of the
// ultrasonic-band capture. The probe repeats every symbol, so lags are only
// meaningful modulo one symbol.
inline long coarse_align(const ProbeSignal& probe,
                         std::span<const double> rx_ultra) {
  const int len = probe.symbol_len();
  if (static_cast<int>(rx_ultra.size()) < 2 * len)
    throw ConfigError("coarse_align: capture shorter than two symbols");

  Eigen::Map<const Eigen::VectorXd> tx(probe.samples.data(), len);
  const double tx_norm = tx.norm();

  // Rolling energy of each candidate window segment.
  std::vector<double> prefix_sq(2 * len + 1, 0.0);
  for (int i = 0; i < 2 * len; ++i)
    prefix_sq[i + 1] = prefix_sq[i] + rx_ultra[i] * rx_ultra[i];

  long best_lag = -1;
  double best_score = 0.0;
  bool any = false;
  for (int lag = 0; lag < len; ++lag) {
    const double seg_energy = prefix_sq[lag + len] - prefix_sq[lag];
    if (seg_energy <= 0.0) continue;
    Eigen::Map<const Eigen::VectorXd> seg(rx_ultra.data() + lag, len);
    const double score = tx.dot(seg) / (tx_norm * std::sqrt(seg_energy));
    if (!any || score > best_score) {
      best_score = score;
      best_lag = lag;
      any = true;
    }
  }
  if (!any) throw DataError("coarse_align: no probe energy in capture");
  return best_lag;
}

struct FineAlignResult {
  long lag;        // coarse_lag + best integer offset in [-search, +search]
  double quality;  // subcarrier phase coherence at the chosen lag, in [0, 1]
};

namespace detail {

// Least-squares slope of the unwrapped residual phases over the active bins.
inline double phase_slope(const std::vector<double>& theta,
                          const std::vector<int>& bins) {
  const int m = static_cast<int>(theta.size());
  std::vector<double> unwrapped(m);
  unwrapped[0] = theta[0];
  for (int i = 1; i < m; ++i)
    unwrapped[i] = unwrapped[i - 1] + wrap_phase(theta[i] - theta[i - 1]);

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < m; ++i) {
    const double x = bins[i];
    sx += x;
    sy += unwrapped[i];
    sxx += x * x;
    sxy += x * unwrapped[i];
  }
  const double denom = m * sxx - sx * sx;
  return denom != 0.0 ? (m * sxy - sx * sy) / denom : 0.0;
}

// Mean resultant length of the residual phases. A residual delay of d
// samples fans the phases across 2*pi*d*B/N radians, so anything short of
// true alignment pulls this well below 1.
inline double phase_coherence(const std::vector<double>& theta) {
  double cre = 0, cim = 0;
  for (double t : theta) {
    cre += std::cos(t);
    cim += std::sin(t);
  }
  const int m = static_cast<int>(theta.size());
  return std::sqrt(cre * cre + cim * cim) / m;
}

}  // namespace detail

// Integer refinement of the coarse lag. For each candidate offset one symbol
// is extracted and its per-subcarrier phase is compared with the transmitted
// phases; the winning lag is the one whose residual phase slope across the
// band is smallest. A residual delay of d samples shows up as a slope of
// -2*pi*d/symbol_len per bin, so the argmin lands on the true boundary.
inline FineAlignResult fine_align(const ProbeSignal& probe,
                                  std::span<const double> rx_ultra,
                                  long coarse_lag, int search = 25) {
  const int len = probe.symbol_len();
  const long n = static_cast<long>(rx_ultra.size());
  BandDft band(len, probe.active_bins);

  FineAlignResult best{0, 0.0};
  double best_metric = 0.0;
  bool any = false;
  std::vector<double> theta(probe.active_bins.size());
  for (int delta = -search; delta <= search; ++delta) {
    long pos = coarse_lag + delta;
    // The stream is symbol-periodic; candidates that would start before the
    // capture are taken one symbol later.
    while (pos < 0) pos += len;
    if (pos + len > n)
      throw ConfigError("fine_align: candidate window out of bounds");

    Eigen::VectorXcd spec = band(rx_ultra.subspan(pos, len));
    for (size_t i = 0; i < theta.size(); ++i)
      theta[i] =
          wrap_phase(std::arg(spec[static_cast<int>(i)]) - probe.subcarrier_phases[i]);

    const double metric = std::abs(detail::phase_slope(theta, probe.active_bins));
    if (!any || metric < best_metric) {
      best_metric = metric;
      best = {coarse_lag + delta, detail::phase_coherence(theta)};
      any = true;
    }
  }
  return best;
}

}  // namespace earkey::dsp
