#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "earkey/common.hpp"
#include "earkey/dsp/dft.hpp"

namespace earkey::dsp {

// One second-order section, transposed direct form II.
struct Biquad {
  double b0, b1, b2;
  double a1, a2;  // denominator, a0 normalized to 1
};

enum class FilterKind { kLowpass, kHighpass };

// Digital Butterworth as cascaded biquads via the bilinear transform.
// Order must be even so every analog pole pairs with its conjugate.
inline std::vector<Biquad> butterworth(int order, double cutoff_hz,
                                       double sample_rate, FilterKind kind) {
  if (order < 2 || order % 2 != 0)
    throw ConfigError("butterworth: order must be even and >= 2");
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < sample_rate / 2.0))
    throw ConfigError("butterworth: cutoff must lie inside (0, fs/2)");

  const double warped = std::tan(kPi * cutoff_hz / sample_rate);
  std::vector<Biquad> sections;
  for (int k = 0; k < order / 2; ++k) {
    // Conjugate analog prototype pole pair on the unit circle.
    const double theta = kPi * (2.0 * k + 1.0) / (2.0 * order) + kPi / 2.0;
    std::complex<double> pole(std::cos(theta), std::sin(theta));
    std::complex<double> p = (kind == FilterKind::kLowpass)
                                 ? warped * pole
                                 : warped / pole;
    std::complex<double> zp = (1.0 + p) / (1.0 - p);
    const double a1 = -2.0 * zp.real();
    const double a2 = std::norm(zp);
    Biquad s{};
    s.a1 = a1;
    s.a2 = a2;
    if (kind == FilterKind::kLowpass) {
      const double g = (1.0 + a1 + a2) / 4.0;  // unit gain at DC
      s.b0 = g;
      s.b1 = 2.0 * g;
      s.b2 = g;
    } else {
      const double g = (1.0 - a1 + a2) / 4.0;  // unit gain at Nyquist
      s.b0 = g;
      s.b1 = -2.0 * g;
      s.b2 = g;
    }
    sections.push_back(s);
  }
  return sections;
}

namespace detail {

// Steady-state section state for a constant input x0 (suppresses start-up
// transients in filtfilt).
inline void steady_state(const Biquad& s, double x0, double& z1, double& z2) {
  const double dc = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
  z1 = (dc - s.b0) * x0;
  z2 = (s.b2 - s.a2 * dc) * x0;
}

inline void run_cascade(const std::vector<Biquad>& sections,
                        std::vector<double>& x) {
  for (const Biquad& s : sections) {
    double z1, z2;
    steady_state(s, x.empty() ? 0.0 : x.front(), z1, z2);
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
}

}  // namespace detail

inline int filtfilt_pad(const std::vector<Biquad>& sections) {
  return 12 * static_cast<int>(sections.size());
}

// Forward-backward (zero phase) filtering with odd-reflection edge padding.
// Output length equals input length.
inline std::vector<double> filtfilt(const std::vector<Biquad>& sections,
                                    std::span<const double> x) {
  const int pad = filtfilt_pad(sections);
  const int n = static_cast<int>(x.size());
  if (n <= pad)
    throw ConfigError("filtfilt: input shorter than filter warm-up length");

  std::vector<double> ext(n + 2 * pad);
  for (int i = 0; i < pad; ++i) ext[i] = 2.0 * x[0] - x[pad - i];
  std::copy(x.begin(), x.end(), ext.begin() + pad);
  for (int i = 0; i < pad; ++i)
    ext[pad + n + i] = 2.0 * x[n - 1] - x[n - 2 - i];

  detail::run_cascade(sections, ext);
  std::reverse(ext.begin(), ext.end());
  detail::run_cascade(sections, ext);
  std::reverse(ext.begin(), ext.end());

  return {ext.begin() + pad, ext.begin() + pad + n};
}

// Ultrasonic band isolation: zero-phase order-8 high-pass at 17.5 kHz.
inline std::vector<double> isolate_ultrasonic(std::span<const double> audio,
                                              double sample_rate = kSampleRate,
                                              double cutoff_hz = 17500.0) {
  static thread_local std::vector<Biquad> cached;
  static thread_local double cached_fs = 0.0, cached_fc = 0.0;
  if (cached.empty() || cached_fs != sample_rate || cached_fc != cutoff_hz) {
    cached = butterworth(8, cutoff_hz, sample_rate, FilterKind::kHighpass);
    cached_fs = sample_rate;
    cached_fc = cutoff_hz;
  }
  return filtfilt(cached, audio);
}

// Whisper band: zero-phase order-8 low-pass at 12 kHz.
inline std::vector<double> lowpass_whisper(std::span<const double> audio,
                                           double sample_rate = kSampleRate,
                                           double cutoff_hz = 12000.0) {
  static thread_local std::vector<Biquad> cached;
  static thread_local double cached_fs = 0.0, cached_fc = 0.0;
  if (cached.empty() || cached_fs != sample_rate || cached_fc != cutoff_hz) {
    cached = butterworth(8, cutoff_hz, sample_rate, FilterKind::kLowpass);
    cached_fs = sample_rate;
    cached_fc = cutoff_hz;
  }
  return filtfilt(cached, audio);
}

inline std::vector<double> decimate_by_2(std::span<const double> x) {
  std::vector<double> out(x.size() / 2);
  for (size_t i = 0; i < out.size(); ++i) out[i] = x[2 * i];
  return out;
}

// Cascade frequency response magnitude at frequency f (single pass).
inline double cascade_gain(const std::vector<Biquad>& sections, double f_hz,
                           double sample_rate) {
  const double w = kTwoPi * f_hz / sample_rate;
  const std::complex<double> z1 = std::polar(1.0, -w);
  const std::complex<double> z2 = z1 * z1;
  std::complex<double> h(1.0, 0.0);
  for (const Biquad& s : sections)
    h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  return std::abs(h);
}

}  // namespace earkey::dsp
