#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "earkey/common.hpp"
#include "earkey/dsp/align.hpp"
#include "earkey/dsp/burg.hpp"
#include "earkey/dsp/filters.hpp"
#include "earkey/dsp/mel.hpp"
#include "earkey/dsp/probe.hpp"
#include "earkey/dsp/window_ops.hpp"

namespace earkey::dsp {

// Received audio snapped to symbol boundaries and split into the two
// modality streams.
struct AlignedCapture {
  std::vector<double> ultrasonic;  // 48 kHz, high-passed, num_symbols * 2046
  std::vector<double> whisper;     // 24 kHz, low-passed,  num_symbols * 1023
  long coarse_lag = 0;
  long fine_lag = 0;
  double align_quality = 0.0;
  long num_symbols = 0;
};

// Per-window twin features: AR coefficients of the boosted ultrasonic band
// and the matching log-mel patch of the whisper band.
struct FeaturePair {
  Eigen::VectorXd ar;    // ar_order
  Eigen::MatrixXd mel;   // frames_per_window x n_mels
  int window_index = 0;
  long start_sample = 0;  // at 48 kHz, relative to the aligned capture
  long end_sample = 0;
};

struct FrontendConfig {
  int ar_order = 200;
  MelConfig mel;
};

inline AlignedCapture align_capture(const ProbeSignal& probe,
                                    std::span<const double> raw_rx) {
  const int len = probe.symbol_len();
  std::vector<double> ultra = isolate_ultrasonic(raw_rx, probe.sample_rate);

  const long coarse = coarse_align(probe, ultra);
  const FineAlignResult fine = fine_align(probe, ultra, coarse);

  long start = fine.lag % len;
  if (start < 0) start += len;
  const long num_symbols = (static_cast<long>(raw_rx.size()) - start) / len;
  if (num_symbols < 1) throw DataError("align_capture: no full symbol after alignment");

  AlignedCapture cap;
  cap.coarse_lag = coarse;
  cap.fine_lag = fine.lag;
  cap.align_quality = fine.quality;
  cap.num_symbols = num_symbols;
  cap.ultrasonic.assign(ultra.begin() + start,
                        ultra.begin() + start + num_symbols * len);

  std::vector<double> low = lowpass_whisper(raw_rx, probe.sample_rate);
  std::vector<double> aligned_low(low.begin() + start,
                                  low.begin() + start + num_symbols * len);
  cap.whisper = decimate_by_2(aligned_low);
  return cap;
}

// Log-mel patches per sliding window for symbol-aligned 48 kHz audio:
// 12 kHz low-pass, decimate by 2, one mel frame per symbol, 10 frames per
// patch with a 2-frame stride.
inline std::vector<Eigen::MatrixXd> whisper_features(
    std::span<const double> aligned_audio, const MelConfig& mel_cfg = {},
    int sample_rate = kSampleRate) {
  std::vector<double> low = lowpass_whisper(aligned_audio, sample_rate);
  std::vector<double> dec = decimate_by_2(low);
  MelExtractor mel(mel_cfg);
  Eigen::MatrixXd frames = mel.frames(dec);

  std::vector<Eigen::MatrixXd> patches;
  const long n_frames = frames.rows();
  if (n_frames < kFramesPerWindow) return patches;
  const long count = (n_frames - kFramesPerWindow) / kWindowStrideFrames + 1;
  for (long w = 0; w < count; ++w)
    patches.push_back(
        frames.middleRows(w * kWindowStrideFrames, kFramesPerWindow));
  return patches;
}

// Twin feature streams for an aligned capture. The ultrasonic AR vector and
// the mel patch of window i cover the same absolute time span.
inline std::vector<FeaturePair> extract_feature_pairs(
    const AlignedCapture& cap, const FrontendConfig& cfg = {}) {
  std::vector<FeaturePair> out;
  const auto spans = slice_windows(cap.num_symbols);
  if (spans.empty()) return out;

  MelExtractor mel(cfg.mel);
  Eigen::MatrixXd frames = mel.frames(cap.whisper);

  for (const WindowSpan& s : spans) {
    FeaturePair fp;
    fp.window_index = s.index;
    fp.start_sample = s.start;
    fp.end_sample = s.end;

    std::span<const double> win(cap.ultrasonic.data() + s.start,
                                static_cast<size_t>(s.end - s.start));
    std::vector<double> boosted = boost_second_diff(win);
    BurgResult br = burg(boosted, cfg.ar_order);
    fp.ar = Eigen::Map<const Eigen::VectorXd>(br.ar.data(), br.ar.size());

    fp.mel = frames.middleRows(s.index * kWindowStrideFrames, kFramesPerWindow);
    out.push_back(std::move(fp));
  }
  return out;
}

}  // namespace earkey::dsp
