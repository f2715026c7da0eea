#pragma once

#include <Eigen/Dense>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "earkey/common.hpp"

namespace earkey::auth {

using Vec = Eigen::VectorXd;

enum class ScoreMode {
  kLivePair,        // cosine of the live whisper/ultrasonic pair
  kReferenceMatch,  // best cosine of live ultrasonic against enrolled whisper
};

inline ScoreMode parse_score_mode(const std::string& s) {
  if (s == "live-pair") return ScoreMode::kLivePair;
  if (s == "reference-match") return ScoreMode::kReferenceMatch;
  throw ConfigError("score mode must be live-pair or reference-match: " + s);
}

inline const char* score_mode_name(ScoreMode m) {
  return m == ScoreMode::kLivePair ? "live-pair" : "reference-match";
}

struct ReferenceSet {
  std::string user_id;
  // One (whisper, ultrasonic) authentication-vector pair per registration
  // utterance.
  std::vector<std::pair<Vec, Vec>> pairs;
  uint64_t created_at = 0;  // unix seconds
};

inline double cosine(const Vec& a, const Vec& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0)
    throw DataError("cosine: zero-norm authentication vector");
  return a.dot(b) / (na * nb);
}

inline double score(const Vec& whisper_vec, const Vec& ultra_vec,
                    const ReferenceSet& refs, ScoreMode mode) {
  if (mode == ScoreMode::kLivePair) return cosine(whisper_vec, ultra_vec);
  if (refs.pairs.empty())
    throw ConfigError("score: reference-match mode needs enrolled references");
  double best = -1.0;
  for (const auto& [ref_whisper, ref_ultra] : refs.pairs)
    best = std::max(best, cosine(ultra_vec, ref_whisper));
  return best;
}

struct VerdictRecord {
  double score = 0.0;
  double thr = 0.0;
  bool accept = false;  // strictly score > thr; the boundary rejects
  ScoreMode mode = ScoreMode::kLivePair;
  std::string utterance_id;
};

inline VerdictRecord verify(const Vec& whisper_vec, const Vec& ultra_vec,
                            const ReferenceSet& refs, double thr,
                            ScoreMode mode, std::string utterance_id = {}) {
  VerdictRecord v;
  v.score = score(whisper_vec, ultra_vec, refs, mode);
  v.thr = thr;
  v.accept = v.score > thr;
  v.mode = mode;
  v.utterance_id = std::move(utterance_id);
  return v;
}

// Reference sets persist as "EKRS" v1: magic, version u16, d u32, pair count
// u32, user id (u16 length + bytes), created_at u64, then per pair 2*d f64.
inline void save_reference_set(const ReferenceSet& refs,
                               const std::string& path) {
  if (refs.pairs.empty())
    throw ConfigError("save_reference_set: empty reference set");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("reference set: cannot write " + path);
  const uint32_t d = static_cast<uint32_t>(refs.pairs.front().first.size());
  auto put = [&os](auto v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); };
  os.write("EKRS", 4);
  put(static_cast<uint16_t>(1));
  put(d);
  put(static_cast<uint32_t>(refs.pairs.size()));
  put(static_cast<uint16_t>(refs.user_id.size()));
  os.write(refs.user_id.data(), static_cast<std::streamsize>(refs.user_id.size()));
  put(refs.created_at);
  for (const auto& [w, u] : refs.pairs) {
    if (w.size() != d || u.size() != d)
      throw ConfigError("save_reference_set: inconsistent vector dimensions");
    os.write(reinterpret_cast<const char*>(w.data()), d * sizeof(double));
    os.write(reinterpret_cast<const char*>(u.data()), d * sizeof(double));
  }
  if (!os) throw DataError("reference set: write failed for " + path);
}

inline ReferenceSet load_reference_set(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("reference set: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "EKRS", 4) != 0)
    throw DataError("reference set: bad magic");
  auto get = [&is](auto& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw DataError("reference set: truncated file");
  };
  uint16_t version;
  get(version);
  if (version != 1) throw DataError("reference set: unsupported version");
  uint32_t d, count;
  get(d);
  get(count);
  uint16_t id_len;
  get(id_len);
  ReferenceSet refs;
  refs.user_id.resize(id_len);
  is.read(refs.user_id.data(), id_len);
  get(refs.created_at);
  for (uint32_t i = 0; i < count; ++i) {
    Vec w(d), u(d);
    is.read(reinterpret_cast<char*>(w.data()), d * sizeof(double));
    is.read(reinterpret_cast<char*>(u.data()), d * sizeof(double));
    if (!is) throw DataError("reference set: truncated payload");
    refs.pairs.emplace_back(std::move(w), std::move(u));
  }
  if (refs.pairs.empty()) throw DataError("reference set: no enrolled pairs");
  return refs;
}

}  // namespace earkey::auth
