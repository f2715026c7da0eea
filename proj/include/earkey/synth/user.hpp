#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "earkey/common.hpp"
#include "earkey/dsp/align.hpp"
#include "earkey/dsp/dft.hpp"
#include "earkey/dsp/probe.hpp"
#include "earkey/rng.hpp"

namespace earkey::synth {

constexpr int kIrTaps = 64;

struct LetterGesture {
  std::array<double, kIrTaps> ir_delta{};  // added to the base IR while active
};

struct Formants {
  double f1_hz = 0, f2_hz = 0;
  double bw1_hz = 90, bw2_hz = 140;
  double gain = 1.0;
};

// Everything identity-bearing about one simulated wearer: the resting
// ear-canal impulse response, how each letter's articulation perturbs it,
// and the whisper voice.
struct UserProfile {
  std::string user_id;
  std::array<double, kIrTaps> base_ir{};
  std::array<LetterGesture, 26> articulation;
  std::array<Formants, 26> whisper_voice;
  uint64_t seed = 0;
};

namespace detail {

// In-band group delay (samples) of a 64-tap IR, estimated from the phase
// slope over the probe band. Symbol timing stays unambiguous only when this
// is well under half a sample.
inline double inband_group_delay(const std::array<double, kIrTaps>& ir,
                                 const std::vector<int>& bins,
                                 int symbol_len = kSymbolLen) {
  std::vector<double> theta(bins.size());
  for (size_t i = 0; i < bins.size(); ++i) {
    const double w = dsp::kTwoPi * bins[i] / symbol_len;
    double re = 0, im = 0;
    for (int t = 0; t < kIrTaps; ++t) {
      re += ir[t] * std::cos(w * t);
      im -= ir[t] * std::sin(w * t);
    }
    theta[i] = std::atan2(im, re);
  }
  const double slope = dsp::detail::phase_slope(theta, bins);
  return -slope * symbol_len / dsp::kTwoPi;
}

inline std::vector<int> probe_band_bins(int symbol_len = kSymbolLen,
                                        int sample_rate = kSampleRate,
                                        double lo = 17500.0, double hi = 23000.0) {
  std::vector<int> bins;
  const double bin_hz = static_cast<double>(sample_rate) / symbol_len;
  for (int k = 1; k < symbol_len / 2; ++k) {
    const double f = k * bin_hz;
    if (f >= lo && f <= hi) bins.push_back(k);
  }
  return bins;
}

// Dominant direct tap, decaying random echoes, a gentle high-band tilt,
// unit energy. Resampled until the in-band group delay is negligible.
inline std::array<double, kIrTaps> draw_ir(Rng rng, double echo_lo,
                                           double echo_hi,
                                           const std::vector<int>& bins,
                                           double max_group_delay) {
  for (int attempt = 0; attempt < 256; ++attempt) {
    Rng r = rng.fork("ir-attempt", attempt);
    std::array<double, kIrTaps> ir{};
    ir[0] = 1.0;
    double echo_energy = 0.0;
    std::array<double, kIrTaps> echo{};
    const double rho = 0.9;
    double decay = 1.0;
    for (int t = 1; t < kIrTaps; ++t) {
      decay *= rho;
      echo[t] = r.normal() * decay;
      echo_energy += echo[t] * echo[t];
    }
    const double target = r.uniform(echo_lo, echo_hi);
    const double s = std::sqrt(target / echo_energy);
    for (int t = 1; t < kIrTaps; ++t) ir[t] = echo[t] * s;

    // Fixed spectral tilt standing in for the transducer roll-off.
    std::array<double, kIrTaps> tilted{};
    const double b = 0.3;
    tilted[0] = ir[0];
    for (int t = 1; t < kIrTaps; ++t) tilted[t] = ir[t] + b * ir[t - 1];

    double energy = 0.0;
    for (double v : tilted) energy += v * v;
    const double inv = 1.0 / std::sqrt(energy);
    for (double& v : tilted) v *= inv;

    if (std::abs(inband_group_delay(tilted, bins)) <= max_group_delay)
      return tilted;
  }
  throw ConfigError("synth_user: could not draw a usable impulse response");
}

}  // namespace detail

inline double ir_distance(const std::array<double, kIrTaps>& a,
                          const std::array<double, kIrTaps>& b) {
  double s = 0.0;
  for (int t = 0; t < kIrTaps; ++t) s += (a[t] - b[t]) * (a[t] - b[t]);
  return std::sqrt(s);
}

inline UserProfile synth_user(uint64_t seed, std::string user_id = {}) {
  UserProfile p;
  p.seed = seed;
  p.user_id = user_id.empty() ? "u" + std::to_string(seed) : std::move(user_id);

  const std::vector<int> bins = detail::probe_band_bins();
  Rng rng = Rng(seed).fork("user-profile");
  p.base_ir = detail::draw_ir(rng.fork("base"), 0.05, 0.12, bins, 0.3);

  for (int c = 0; c < 26; ++c) {
    Rng r = rng.fork("articulation", c);
    double energy = 0.0;
    for (int t = 0; t < kIrTaps; ++t) {
      p.articulation[c].ir_delta[t] = r.normal() * std::pow(0.92, t);
      energy += p.articulation[c].ir_delta[t] * p.articulation[c].ir_delta[t];
    }
    const double depth = 0.45;  // strong content signature vs the unit base IR
    const double s = depth / std::sqrt(energy);
    for (double& v : p.articulation[c].ir_delta) v *= s;
  }

  // Shared letter formant chart with a per-user vocal-tract offset.
  Rng voice = rng.fork("voice");
  const double user_scale = voice.uniform(0.94, 1.06);
  for (int c = 0; c < 26; ++c) {
    Formants f;
    f.f1_hz = (330.0 + 42.0 * (c % 13)) * user_scale *
              (1.0 + 0.015 * voice.normal());
    f.f2_hz = (1050.0 + 130.0 * (c % 11) + 55.0 * (c % 5)) * user_scale *
              (1.0 + 0.015 * voice.normal());
    f.bw1_hz = 90.0;
    f.bw2_hz = 150.0;
    f.gain = voice.uniform(0.85, 1.15);
    p.whisper_voice[c] = f;
  }
  return p;
}

// Session channel: the profile's base IR plus a re-wearing perturbation that
// stays constant within the session.
inline std::array<double, kIrTaps> session_ir(const UserProfile& user,
                                              uint64_t session_seed) {
  const std::vector<int> bins = detail::probe_band_bins();
  Rng rng = Rng(user.seed).fork("session", session_seed);
  for (int attempt = 0; attempt < 256; ++attempt) {
    Rng r = rng.fork("jitter", attempt);
    std::array<double, kIrTaps> ir = user.base_ir;
    double energy = 0.0;
    std::array<double, kIrTaps> jitter{};
    for (int t = 0; t < kIrTaps; ++t) {
      jitter[t] = r.normal() * std::pow(0.9, t);
      energy += jitter[t] * jitter[t];
    }
    const double depth = 0.12;  // placement change, well below user spacing
    const double s = depth / std::sqrt(energy);
    for (int t = 0; t < kIrTaps; ++t) ir[t] += jitter[t] * s;

    double total = 0.0;
    for (double v : ir) total += v * v;
    const double inv = 1.0 / std::sqrt(total);
    for (double& v : ir) v *= inv;

    if (std::abs(detail::inband_group_delay(ir, bins)) <= 0.4) return ir;
  }
  throw ConfigError("session_ir: could not draw a usable session channel");
}

}  // namespace earkey::synth
