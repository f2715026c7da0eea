#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "earkey/common.hpp"
#include "earkey/dsp/dft.hpp"
#include "earkey/rng.hpp"

namespace earkey::dsp {

// One OFDM transmit symbol. Flat in-band subcarrier amplitudes with
// pseudo-random phases from the seed; the same seed always regenerates the
// same waveform.
struct ProbeSignal {
  std::vector<double> samples;           // length symbol_len, peak |s| == 1
  int sample_rate = kSampleRate;
  double band_lo_hz = 17500.0;
  double band_hi_hz = 23000.0;
  std::vector<int> active_bins;          // DFT bins inside [band_lo, band_hi]
  std::vector<double> subcarrier_phases; // radians, one per active bin
  uint64_t seed = 0;

  int symbol_len() const { return static_cast<int>(samples.size()); }
};

inline ProbeSignal generate_probe(uint64_t seed, int symbol_len = kSymbolLen,
                                  int sample_rate = kSampleRate,
                                  double band_lo_hz = 17500.0,
                                  double band_hi_hz = 23000.0) {
  if (symbol_len < 2 || symbol_len % 2 != 0)
    throw ConfigError("generate_probe: symbol length must be even and >= 2");
  if (!(band_lo_hz > 0.0) || !(band_hi_hz > band_lo_hz) ||
      !(band_hi_hz < sample_rate / 2.0))
    throw ConfigError("generate_probe: band must lie inside (0, fs/2)");

  const double bin_hz = static_cast<double>(sample_rate) / symbol_len;
  const int k_lo = static_cast<int>(std::ceil(band_lo_hz / bin_hz));
  const int k_hi = static_cast<int>(std::floor(band_hi_hz / bin_hz));
  // DC and Nyquist carry no phase freedom; keep them out of the band.
  const int k_min = std::max(k_lo, 1);
  const int k_max = std::min(k_hi, symbol_len / 2 - 1);
  if (k_min > k_max)
    throw ConfigError("generate_probe: band holds no subcarrier at this FFT resolution");

  ProbeSignal p;
  p.sample_rate = sample_rate;
  p.band_lo_hz = band_lo_hz;
  p.band_hi_hz = band_hi_hz;
  p.seed = seed;

  Rng rng = Rng(seed).fork("probe-phase");
  for (int k = k_min; k <= k_max; ++k) {
    p.active_bins.push_back(k);
    p.subcarrier_phases.push_back(rng.uniform(0.0, kTwoPi));
  }

  // Hermitian-symmetric spectrum realized directly as a cosine sum.
  p.samples.assign(symbol_len, 0.0);
  for (size_t i = 0; i < p.active_bins.size(); ++i) {
    const double w = kTwoPi * p.active_bins[i] / symbol_len;
    const double ph = p.subcarrier_phases[i];
    for (int n = 0; n < symbol_len; ++n) p.samples[n] += std::cos(w * n + ph);
  }
  double peak = 0.0;
  for (double s : p.samples) peak = std::max(peak, std::abs(s));
  if (peak > 0.0)
    for (double& s : p.samples) s /= peak;
  return p;
}

}  // namespace earkey::dsp
