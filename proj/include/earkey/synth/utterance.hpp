#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "earkey/common.hpp"
#include "earkey/dsp/filters.hpp"
#include "earkey/dsp/probe.hpp"
#include "earkey/rng.hpp"
#include "earkey/synth/user.hpp"

namespace earkey::synth {

struct LetterSpan {
  char letter;
  long start;  // samples on the aligned timeline, [start, end)
  long end;
};

struct SynthUtterance {
  std::vector<double> rx_audio;  // 48 kHz mono, peak-scaled to 0.85
  std::string word;
  std::string user_id;
  int session_id = 0;
  int round = 0;
  long true_delay = 0;  // capture offset in samples, in [0, 4092)
  double snr_db = 0.0;
  std::vector<LetterSpan> letter_spans;  // aligned-timeline ground truth
  int lead_frames = 0;
  int total_frames = 0;
  // The whisper component alone (aligned timeline), kept for band oracles.
  std::vector<double> whisper_component;
};

struct GestureTiming {
  int lead_frames = 6;
  int tail_frames = 6;
  int frames_per_letter = 3;
};

namespace detail {

// Two-pole resonator; output rescaled to unit RMS by the caller.
inline void resonate(std::vector<double>& x, double f_hz, double bw_hz,
                     double sample_rate) {
  const double r = std::exp(-dsp::kPi * bw_hz / sample_rate);
  const double c = 2.0 * r * std::cos(dsp::kTwoPi * f_hz / sample_rate);
  const double r2 = r * r;
  double y1 = 0, y2 = 0;
  for (double& v : x) {
    const double y = v + c * y1 - r2 * y2;
    y2 = y1;
    y1 = y;
    v = y;
  }
}

}  // namespace detail

// One silent-spelling take: the probe stream through the time-varying
// ear-canal channel (letter gestures perturbing the session IR), the
// whisper band, and white noise at the requested SNR, all captured with an
// integer delay the caller can verify alignment against.
inline SynthUtterance synth_utterance(const UserProfile& user,
                                      const std::string& word,
                                      uint64_t session_seed, uint64_t take_seed,
                                      double snr_db,
                                      const dsp::ProbeSignal& probe,
                                      const GestureTiming& timing = {}) {
  if (word.empty()) throw ConfigError("synth_utterance: empty word");
  for (char c : word)
    if (c < 'a' || c > 'z')
      throw ConfigError("synth_utterance: word must be lowercase a-z");

  const int len = probe.symbol_len();
  const int n_letters = static_cast<int>(word.size());
  const int total_frames = timing.lead_frames + timing.tail_frames +
                           timing.frames_per_letter * n_letters;
  const long aligned_len = static_cast<long>(total_frames) * len;
  const long pad = 3L * len;  // capture delay plus channel memory

  const std::array<double, kIrTaps> ir_sess = session_ir(user, session_seed);
  Rng take_rng = Rng(user.seed).fork("take", session_seed ^ (take_seed * 0x9e37ULL));

  SynthUtterance utt;
  utt.word = word;
  utt.user_id = user.user_id;
  utt.true_delay = static_cast<long>(take_rng.fork("delay").below(2 * len));
  utt.snr_db = snr_db;
  utt.lead_frames = timing.lead_frames;
  utt.total_frames = total_frames;

  for (int i = 0; i < n_letters; ++i) {
    LetterSpan span;
    span.letter = word[i];
    span.start = static_cast<long>(timing.lead_frames + timing.frames_per_letter * i) * len;
    span.end = span.start + static_cast<long>(timing.frames_per_letter) * len;
    utt.letter_spans.push_back(span);
  }

  // Gesture envelope per aligned sample: raised cosine over each letter span.
  // Amplitude micro-jitter varies take to take.
  std::vector<double> envelope(aligned_len, 0.0);
  std::vector<int> letter_at(aligned_len, -1);
  Rng gesture_rng = take_rng.fork("gesture");
  for (const LetterSpan& span : utt.letter_spans) {
    const double amp = gesture_rng.uniform(0.85, 1.15);
    const double width = static_cast<double>(span.end - span.start);
    for (long a = span.start; a < span.end; ++a) {
      const double phase = (a - span.start) / width;
      envelope[a] = amp * 0.5 * (1.0 - std::cos(dsp::kTwoPi * phase));
      letter_at[a] = span.letter - 'a';
    }
  }

  // Ultrasonic part: time-varying convolution in aligned time.
  auto tx = [&](long a) {
    long idx = a % len;
    if (idx < 0) idx += len;
    return probe.samples[idx];
  };
  std::vector<double> aligned(pad + aligned_len);
  for (long a = -pad; a < aligned_len; ++a) {
    const int letter = a >= 0 ? letter_at[a] : -1;
    const double env = a >= 0 ? envelope[a] : 0.0;
    double acc = 0.0;
    if (letter < 0) {
      for (int t = 0; t < kIrTaps; ++t) acc += ir_sess[t] * tx(a - t);
    } else {
      const auto& delta = user.articulation[letter].ir_delta;
      for (int t = 0; t < kIrTaps; ++t)
        acc += (ir_sess[t] + env * delta[t]) * tx(a - t);
    }
    aligned[pad + a] = acc;
  }

  // Whisper part: per-letter formant-filtered noise bursts, then the 12 kHz
  // low-pass, mixed well below the probe level.
  std::vector<double> whisper(pad + aligned_len, 0.0);
  Rng noise_rng = take_rng.fork("whisper-noise");
  for (const LetterSpan& span : utt.letter_spans) {
    const Formants& f = user.whisper_voice[span.letter - 'a'];
    std::vector<double> burst(span.end - span.start);
    for (double& v : burst) v = noise_rng.normal();
    detail::resonate(burst, f.f1_hz, f.bw1_hz, probe.sample_rate);
    detail::resonate(burst, f.f2_hz, f.bw2_hz, probe.sample_rate);
    double rms = 0.0;
    for (double v : burst) rms += v * v;
    rms = std::sqrt(rms / burst.size());
    const double norm = rms > 0 ? 1.0 / rms : 0.0;
    const double width = static_cast<double>(burst.size());
    for (size_t i = 0; i < burst.size(); ++i) {
      const double phase = static_cast<double>(i) / width;
      const double env = 0.5 * (1.0 - std::cos(dsp::kTwoPi * phase));
      whisper[pad + span.start + i] += burst[i] * norm * env * f.gain;
    }
  }
  whisper = dsp::lowpass_whisper(whisper, probe.sample_rate);

  double probe_rms = 0.0, whisper_rms = 0.0;
  for (long i = 0; i < pad + aligned_len; ++i) {
    probe_rms += aligned[i] * aligned[i];
    whisper_rms += whisper[i] * whisper[i];
  }
  probe_rms = std::sqrt(probe_rms / (pad + aligned_len));
  whisper_rms = std::sqrt(whisper_rms / (pad + aligned_len));
  const double whisper_scale =
      whisper_rms > 0 ? 0.6 * probe_rms / whisper_rms : 0.0;

  utt.whisper_component.resize(aligned_len);
  for (long a = 0; a < aligned_len; ++a)
    utt.whisper_component[a] = whisper[pad + a] * whisper_scale;

  // Capture: rx[n] = s_aligned[n - true_delay], plus noise.
  utt.rx_audio.resize(aligned_len);
  double sig_power = 0.0;
  for (long n = 0; n < aligned_len; ++n) {
    const long a = n - utt.true_delay;
    const double s = aligned[pad + a] + whisper[pad + a] * whisper_scale;
    utt.rx_audio[n] = s;
    sig_power += s * s;
  }
  sig_power /= aligned_len;

  if (std::isfinite(snr_db)) {
    Rng awgn = take_rng.fork("awgn");
    const double sigma = std::sqrt(sig_power / std::pow(10.0, snr_db / 10.0));
    for (double& v : utt.rx_audio) v += sigma * awgn.normal();
  }

  double peak = 0.0;
  for (double v : utt.rx_audio) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    const double s = 0.85 / peak;
    for (double& v : utt.rx_audio) v *= s;
  }
  return utt;
}

}  // namespace earkey::synth
