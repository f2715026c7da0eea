#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "earkey/common.hpp"

namespace earkey::io {

// Plain-text key=value experiment configuration. '#' starts a comment.
// Every key is validated; unknown keys are rejected.
struct ExperimentConfig {
  uint64_t seed = 1;
  std::string data_dir = "data";
  std::string out_dir = "out";
  std::string genuine_user = "u000";

  std::vector<std::string> lexicon;  // inline words
  std::string lexicon_file;          // or one word per line

  int users = 5;
  int sessions = 2;
  int rounds = 3;
  double snr_db = 20.0;
  uint64_t probe_seed = 7;
  int gesture_frames = 3;
  int lead_frames = 6;
  int tail_frames = 6;

  int batch_words = 50;
  double tau = 0.7;
  double margin = 0.2;
  double alpha = 0.1;
  double beta = 0.5;
  double gamma = 0.3;
  double lr = 1e-3;
  double momentum = 0.9;
  int epochs = 30;

  int beam_width = 16;
  int n_best = 3;
  int ar_order = 200;
  int n_mels = 64;
  int embed_dim = 128;
  int channels = 128;
  int hidden = 128;
  int spell_hidden = 128;
  std::string score_mode = "live-pair";
};

namespace detail {

inline long to_long(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const long out = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects an integer, got '" + v + "'");
  }
}

inline uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const unsigned long long out = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects an unsigned integer, got '" +
                      v + "'");
  }
}

inline double to_double(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "+inf")
    return std::numeric_limits<double>::infinity();
  try {
    size_t pos = 0;
    const double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
  }
}

inline std::vector<std::string> split_words(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    while (!item.empty() && item.front() == ' ') item.erase(item.begin());
    while (!item.empty() && item.back() == ' ') item.pop_back();
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace detail

inline void validate(const ExperimentConfig& c) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError("config: " + msg);
  };
  require(c.users >= 2, "users must be >= 2");
  require(c.sessions >= 1, "sessions must be >= 1");
  require(c.rounds >= 1, "rounds must be >= 1");
  require(c.snr_db > 0 || std::isinf(c.snr_db) || c.snr_db <= 0,
          "snr_db must be a number or inf");
  require(c.gesture_frames >= 1, "gesture_frames must be >= 1");
  require(c.lead_frames >= 2, "lead_frames must be >= 2");
  require(c.tail_frames >= 0, "tail_frames must be >= 0");
  require(c.batch_words >= 1, "batch_words must be >= 1");
  require(c.tau > 0.0, "tau must be > 0");
  require(c.margin >= 0.0 && c.margin <= std::numbers::pi,
          "margin must lie in [0, pi]");
  require(c.alpha >= 0 && c.beta >= 0 && c.gamma >= 0,
          "loss weights must be non-negative");
  require(c.lr > 0, "lr must be > 0");
  require(c.momentum >= 0 && c.momentum < 1, "momentum must lie in [0, 1)");
  require(c.epochs >= 1, "epochs must be >= 1");
  require(c.beam_width >= 1, "beam_width must be >= 1");
  require(c.n_best >= 1 && c.n_best <= c.beam_width,
          "need 1 <= n_best <= beam_width");
  require(c.ar_order >= 1, "ar_order must be >= 1");
  require(c.n_mels >= 1, "n_mels must be >= 1");
  require(c.embed_dim >= 1 && c.channels >= 1 && c.hidden >= 1 &&
              c.spell_hidden >= 1,
          "model widths must be >= 1");
  require(c.score_mode == "live-pair" || c.score_mode == "reference-match",
          "score_mode must be live-pair or reference-match");
  require(c.lexicon.empty() || c.lexicon_file.empty(),
          "give either lexicon or lexicon_file, not both");
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig c;
  std::istringstream is(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\r' ||
                             line.back() == '\t'))
      line.pop_back();
    size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(line_no) +
                        " is not key=value");
    std::string key = line.substr(start, eq - start);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t'))
      key.pop_back();
    std::string value = line.substr(eq + 1);
    const size_t vs = value.find_first_not_of(" \t");
    value = vs == std::string::npos ? "" : value.substr(vs);

    using detail::to_double;
    using detail::to_long;
    using detail::to_u64;
    if (key == "seed") c.seed = to_u64(key, value);
    else if (key == "data_dir") c.data_dir = value;
    else if (key == "out_dir") c.out_dir = value;
    else if (key == "genuine_user") c.genuine_user = value;
    else if (key == "lexicon") c.lexicon = detail::split_words(value);
    else if (key == "lexicon_file") c.lexicon_file = value;
    else if (key == "users") c.users = static_cast<int>(to_long(key, value));
    else if (key == "sessions") c.sessions = static_cast<int>(to_long(key, value));
    else if (key == "rounds") c.rounds = static_cast<int>(to_long(key, value));
    else if (key == "snr_db") c.snr_db = to_double(key, value);
    else if (key == "probe_seed") c.probe_seed = to_u64(key, value);
    else if (key == "gesture_frames") c.gesture_frames = static_cast<int>(to_long(key, value));
    else if (key == "lead_frames") c.lead_frames = static_cast<int>(to_long(key, value));
    else if (key == "tail_frames") c.tail_frames = static_cast<int>(to_long(key, value));
    else if (key == "batch_words") c.batch_words = static_cast<int>(to_long(key, value));
    else if (key == "tau") c.tau = to_double(key, value);
    else if (key == "margin") c.margin = to_double(key, value);
    else if (key == "alpha") c.alpha = to_double(key, value);
    else if (key == "beta") c.beta = to_double(key, value);
    else if (key == "gamma") c.gamma = to_double(key, value);
    else if (key == "lr") c.lr = to_double(key, value);
    else if (key == "momentum") c.momentum = to_double(key, value);
    else if (key == "epochs") c.epochs = static_cast<int>(to_long(key, value));
    else if (key == "beam_width") c.beam_width = static_cast<int>(to_long(key, value));
    else if (key == "n_best") c.n_best = static_cast<int>(to_long(key, value));
    else if (key == "ar_order") c.ar_order = static_cast<int>(to_long(key, value));
    else if (key == "n_mels") c.n_mels = static_cast<int>(to_long(key, value));
    else if (key == "embed_dim") c.embed_dim = static_cast<int>(to_long(key, value));
    else if (key == "channels") c.channels = static_cast<int>(to_long(key, value));
    else if (key == "hidden") c.hidden = static_cast<int>(to_long(key, value));
    else if (key == "spell_hidden") c.spell_hidden = static_cast<int>(to_long(key, value));
    else if (key == "score_mode") c.score_mode = value;
    else throw ConfigError("config: unknown key '" + key + "'");
  }
  validate(c);
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

// Stable fingerprint of the effective configuration, reported in every
// evaluation so runs can be traced back to their settings.
inline std::string config_fingerprint(const ExperimentConfig& c) {
  std::ostringstream os;
  os << c.seed << '|' << c.data_dir << '|' << c.genuine_user << '|';
  for (const auto& w : c.lexicon) os << w << ',';
  os << '|' << c.lexicon_file << '|' << c.users << '|' << c.sessions << '|'
     << c.rounds << '|' << c.snr_db << '|' << c.probe_seed << '|'
     << c.gesture_frames << '|' << c.lead_frames << '|' << c.tail_frames << '|'
     << c.batch_words << '|' << c.tau << '|' << c.margin << '|' << c.alpha
     << '|' << c.beta << '|' << c.gamma << '|' << c.lr << '|' << c.momentum
     << '|' << c.epochs << '|' << c.beam_width << '|' << c.n_best << '|'
     << c.ar_order << '|' << c.n_mels << '|' << c.embed_dim << '|'
     << c.channels << '|' << c.hidden << '|' << c.spell_hidden << '|'
     << c.score_mode;
  const std::string s = os.str();
  uint64_t h = 1469598103934665603ULL;
  for (char ch : s) {
    h ^= static_cast<uint8_t>(ch);
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace earkey::io
