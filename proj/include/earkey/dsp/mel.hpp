#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <vector>

#include "earkey/common.hpp"
#include "earkey/dsp/dft.hpp"

namespace earkey::dsp {

struct MelConfig {
  int sample_rate = kWhisperRate;
  int n_fft = 1023;  // == hop; one frame per OFDM symbol, rectangular window
  int n_mels = 64;
  double fmin_hz = 0.0;
  double fmax_hz = 12000.0;
  double log_floor = 1e-10;
};

inline double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
inline double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

// Log-mel frames with hop == n_fft (no overlap). Frames are rows; a trailing
// partial frame is dropped.
class MelExtractor {
 public:
  explicit MelExtractor(const MelConfig& cfg = {})
      : cfg_(cfg), dft_(cfg.n_fft) {
    if (cfg.n_mels < 1) throw ConfigError("mel: n_mels must be >= 1");
    if (!(cfg.fmax_hz > cfg.fmin_hz) || cfg.fmax_hz > cfg.sample_rate / 2.0 + 1e-9)
      throw ConfigError("mel: band must lie inside [0, fs/2]");
    build_filterbank();
  }

  const MelConfig& config() const { return cfg_; }

  // frames x n_mels matrix of log-mel energies.
  Eigen::MatrixXd frames(std::span<const double> audio) const {
    const long n_frames = static_cast<long>(audio.size()) / cfg_.n_fft;
    Eigen::MatrixXd out(n_frames, cfg_.n_mels);
    for (long t = 0; t < n_frames; ++t) {
      Eigen::VectorXd power =
          dft_.power(audio.subspan(t * cfg_.n_fft, cfg_.n_fft));
      Eigen::VectorXd mel = fbank_ * power;
      for (int m = 0; m < cfg_.n_mels; ++m)
        out(t, m) = std::log(std::max(mel[m], cfg_.log_floor));
    }
    return out;
  }

  const Eigen::MatrixXd& filterbank() const { return fbank_; }

 private:
  void build_filterbank() {
    const int bins = cfg_.n_fft / 2 + 1;
    fbank_ = Eigen::MatrixXd::Zero(cfg_.n_mels, bins);
    const double mel_lo = hz_to_mel(cfg_.fmin_hz);
    const double mel_hi = hz_to_mel(cfg_.fmax_hz);
    std::vector<double> edges(cfg_.n_mels + 2);
    for (int i = 0; i < cfg_.n_mels + 2; ++i)
      edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (cfg_.n_mels + 1));
    for (int m = 0; m < cfg_.n_mels; ++m) {
      const double f0 = edges[m], f1 = edges[m + 1], f2 = edges[m + 2];
      for (int k = 0; k < bins; ++k) {
        const double f = static_cast<double>(k) * cfg_.sample_rate / cfg_.n_fft;
        double w = 0.0;
        if (f > f0 && f < f1)
          w = (f - f0) / (f1 - f0);
        else if (f >= f1 && f < f2)
          w = (f2 - f) / (f2 - f1);
        fbank_(m, k) = w;
      }
    }
  }

  MelConfig cfg_;
  RealDft dft_;
  Eigen::MatrixXd fbank_;
};

}  // namespace earkey::dsp
