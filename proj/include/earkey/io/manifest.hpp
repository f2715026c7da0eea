#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "earkey/common.hpp"

namespace earkey::io {

struct ManifestEntry {
  std::string utterance_id;
  std::string user;
  int session = 0;
  int round = 0;
  std::string word;
  long true_delay = 0;
  double snr_db = 0.0;
  std::string wav_path;  // relative to the manifest directory

  bool operator==(const ManifestEntry&) const = default;
};

inline nlohmann::json to_json(const ManifestEntry& e) {
  nlohmann::json j{
      {"utterance_id", e.utterance_id}, {"user", e.user},
      {"session", e.session},           {"round", e.round},
      {"word", e.word},                 {"true_delay", e.true_delay},
      {"wav", e.wav_path},
  };
  if (std::isfinite(e.snr_db))
    j["snr_db"] = e.snr_db;
  else
    j["snr_db"] = "inf";  // JSON has no infinity literal
  return j;
}

inline ManifestEntry entry_from_json(const nlohmann::json& j) {
  ManifestEntry e;
  e.utterance_id = j.at("utterance_id").get<std::string>();
  e.user = j.at("user").get<std::string>();
  e.session = j.at("session").get<int>();
  e.round = j.at("round").get<int>();
  e.word = j.at("word").get<std::string>();
  e.true_delay = j.at("true_delay").get<long>();
  if (j.at("snr_db").is_string())
    e.snr_db = std::numeric_limits<double>::infinity();
  else
    e.snr_db = j.at("snr_db").get<double>();
  e.wav_path = j.at("wav").get<std::string>();
  return e;
}

inline void write_manifest(const std::string& path,
                           const std::vector<ManifestEntry>& entries) {
  std::ofstream os(path);
  if (!os) throw DataError("manifest: cannot write " + path);
  for (const ManifestEntry& e : entries) os << to_json(e).dump() << "\n";
  if (!os) throw DataError("manifest: write failed for " + path);
}

inline std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("manifest: cannot open " + path);
  std::vector<ManifestEntry> entries;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw DataError("manifest: bad JSON at line " + std::to_string(line_no));
    try {
      entries.push_back(entry_from_json(j));
    } catch (const nlohmann::json::exception& ex) {
      throw DataError("manifest: line " + std::to_string(line_no) + ": " +
                      ex.what());
    }
  }
  if (entries.empty()) throw DataError("manifest: no entries in " + path);
  return entries;
}

}  // namespace earkey::io
