#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "earkey/dsp/frontend.hpp"
#include "earkey/io/feature_file.hpp"
#include "earkey/io/manifest.hpp"
#include "earkey/io/wav.hpp"
#include "earkey/pipeline/embeddings.hpp"

namespace earkey::train {

// Lazily extracts twin features per utterance, caching both in memory and as
// EKFT files. Also tracks which utterance ids were handed out, so tests can
// assert that training never touched the held-out session.
class FeatureStore {
 public:
  FeatureStore(std::string data_dir, std::string cache_dir,
               dsp::FrontendConfig frontend_cfg, dsp::ProbeSignal probe)
      : data_dir_(std::move(data_dir)),
        cache_dir_(std::move(cache_dir)),
        frontend_cfg_(frontend_cfg),
        probe_(std::move(probe)) {
    if (!cache_dir_.empty())
      std::filesystem::create_directories(cache_dir_);
  }

  const pipeline::Features& get(const io::ManifestEntry& e) {
    consumed_.insert(e.utterance_id);
    auto it = cache_.find(e.utterance_id);
    if (it != cache_.end()) return it->second;

    namespace fs = std::filesystem;
    const fs::path ekft =
        cache_dir_.empty() ? fs::path{}
                           : fs::path(cache_dir_) / (e.utterance_id + ".ekft");
    if (!cache_dir_.empty() && fs::exists(ekft)) {
      pipeline::Features f = io::read_features(
          ekft.string(), frontend_cfg_.ar_order, frontend_cfg_.mel.n_mels);
      return cache_.emplace(e.utterance_id, std::move(f)).first->second;
    }

    const fs::path wav = fs::path(data_dir_) / e.wav_path;
    io::WavData audio = io::read_wav(wav.string());
    if (audio.sample_rate != probe_.sample_rate)
      throw DataError("features: unexpected sample rate in " + wav.string());
    dsp::AlignedCapture cap = dsp::align_capture(probe_, audio.samples);
    pipeline::Features f = dsp::extract_feature_pairs(cap, frontend_cfg_);
    if (f.empty())
      throw DataError("features: capture too short for one window: " +
                      e.utterance_id);
    // Features always pass through EKFT's f32 payload precision, so runs
    // behave identically whether they hit the cache or recompute.
    for (dsp::FeaturePair& fp : f) {
      for (long i = 0; i < fp.ar.size(); ++i)
        fp.ar[i] = static_cast<float>(fp.ar[i]);
      for (long r = 0; r < fp.mel.rows(); ++r)
        for (long c = 0; c < fp.mel.cols(); ++c)
          fp.mel(r, c) = static_cast<float>(fp.mel(r, c));
    }
    if (!cache_dir_.empty()) io::write_features(ekft.string(), f);
    return cache_.emplace(e.utterance_id, std::move(f)).first->second;
  }

  const std::set<std::string>& consumed() const { return consumed_; }
  void reset_provenance() { consumed_.clear(); }

  const dsp::ProbeSignal& probe() const { return probe_; }
  const dsp::FrontendConfig& frontend_config() const { return frontend_cfg_; }

 private:
  std::string data_dir_;
  std::string cache_dir_;
  dsp::FrontendConfig frontend_cfg_;
  dsp::ProbeSignal probe_;
  std::map<std::string, pipeline::Features> cache_;
  std::set<std::string> consumed_;
};

}  // namespace earkey::train
