#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "earkey/decode/lexicon.hpp"
#include "earkey/io/manifest.hpp"
#include "earkey/io/wav.hpp"
#include "earkey/rng.hpp"
#include "earkey/synth/utterance.hpp"

namespace earkey::synth {

struct DatasetConfig {
  int n_users = 2;
  decode::Lexicon lexicon;
  int rounds = 1;
  int sessions = 1;
  double snr_db = 20.0;
  uint64_t seed = 1;
  uint64_t probe_seed = 7;
  GestureTiming timing;
};

// Users with enforced pairwise separation: any colliding profile is redrawn
// with a bumped salt until every base-IR pair is at least min_distance apart.
inline std::vector<UserProfile> synth_users(int n_users, uint64_t seed,
                                            double min_distance = 0.1) {
  if (n_users < 2)
    throw ConfigError("synth_users: need >= 2 users (genuine plus attackers)");
  std::vector<UserProfile> users;
  Rng rng(seed);
  for (int i = 0; i < n_users; ++i) {
    for (uint64_t salt = 0;; ++salt) {
      if (salt > 64) throw ConfigError("synth_users: separation unreachable");
      char name[16];
      std::snprintf(name, sizeof name, "u%03d", i);
      UserProfile candidate =
          synth_user(rng.fork("user", i * 1000 + salt).next_u64(), name);
      bool ok = true;
      for (const UserProfile& other : users)
        if (ir_distance(candidate.base_ir, other.base_ir) <= min_distance)
          ok = false;
      if (ok) {
        users.push_back(std::move(candidate));
        break;
      }
    }
  }
  return users;
}

// Directory tree out_dir/<user>/s<session>/<word>/r<round>.wav plus a
// JSON-lines manifest with the ground truth every oracle needs.
inline std::vector<io::ManifestEntry> synth_dataset(
    const DatasetConfig& cfg, const std::string& out_dir) {
  if (cfg.lexicon.words.empty()) throw ConfigError("synth_dataset: empty lexicon");
  if (cfg.rounds < 1 || cfg.sessions < 1)
    throw ConfigError("synth_dataset: rounds and sessions must be >= 1");

  namespace fs = std::filesystem;
  const dsp::ProbeSignal probe = dsp::generate_probe(cfg.probe_seed);
  const std::vector<UserProfile> users = synth_users(cfg.n_users, cfg.seed);

  std::vector<io::ManifestEntry> entries;
  for (const UserProfile& user : users) {
    for (int session = 0; session < cfg.sessions; ++session) {
      for (const std::string& word : cfg.lexicon.words) {
        for (int round = 0; round < cfg.rounds; ++round) {
          const uint64_t take_seed =
              Rng(cfg.seed).fork(word, round * 131 + session).next_u64();
          SynthUtterance utt = synth_utterance(user, word, session, take_seed,
                                               cfg.snr_db, probe, cfg.timing);
          utt.session_id = session;
          utt.round = round;

          io::ManifestEntry e;
          e.user = user.user_id;
          e.session = session;
          e.round = round;
          e.word = word;
          e.true_delay = utt.true_delay;
          e.snr_db = cfg.snr_db;
          e.utterance_id = user.user_id + "-s" + std::to_string(session) +
                           "-" + word + "-r" + std::to_string(round);
          e.wav_path = user.user_id + "/s" + std::to_string(session) + "/" +
                       word + "/r" + std::to_string(round) + ".wav";

          const fs::path wav_abs = fs::path(out_dir) / e.wav_path;
          fs::create_directories(wav_abs.parent_path());
          io::write_wav(wav_abs.string(), utt.rx_audio, probe.sample_rate);
          entries.push_back(std::move(e));
        }
      }
    }
  }
  io::write_manifest((fs::path(out_dir) / "manifest.jsonl").string(), entries);
  return entries;
}

}  // namespace earkey::synth
