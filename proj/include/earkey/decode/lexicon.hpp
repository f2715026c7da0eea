#pragma once

#include <algorithm>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "earkey/common.hpp"
#include "earkey/decode/ctc_decode.hpp"

namespace earkey::decode {

struct Lexicon {
  std::vector<std::string> words;
  std::string source;

  static Lexicon from_words(std::vector<std::string> words,
                            std::string source = "inline") {
    if (words.empty()) throw ConfigError("lexicon: empty word list");
    std::set<std::string> seen;
    for (const std::string& w : words) {
      if (w.empty()) throw ConfigError("lexicon: empty word");
      for (char c : w)
        if (c < 'a' || c > 'z')
          throw ConfigError("lexicon: words must be lowercase a-z: " + w);
      if (!seen.insert(w).second)
        throw ConfigError("lexicon: duplicate word " + w);
    }
    return {std::move(words), std::move(source)};
  }

  static Lexicon from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("lexicon: cannot open " + path);
    std::vector<std::string> words;
    std::string line;
    while (std::getline(is, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
        line.pop_back();
      if (!line.empty()) words.push_back(line);
    }
    return from_words(std::move(words), path);
  }
};

inline int levenshtein(const std::string& a, const std::string& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= b.size(); ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

struct RankedWord {
  std::string word;
  int distance = 0;       // best edit distance to any hypothesis
  double hyp_log_prob = 0; // log-prob of the best hypothesis at that distance
};

// Ranks lexicon words by minimum edit distance to the hypothesis set,
// tie-broken by hypothesis log-prob, then alphabetically.
inline std::vector<RankedWord> lexicon_topn(
    const std::vector<Hypothesis>& hyps, const Lexicon& lexicon, int n) {
  if (n < 1) throw ConfigError("lexicon_topn: n must be >= 1");
  if (lexicon.words.empty()) throw ConfigError("lexicon_topn: empty lexicon");

  std::vector<RankedWord> ranked;
  ranked.reserve(lexicon.words.size());
  for (const std::string& word : lexicon.words) {
    RankedWord rw;
    rw.word = word;
    rw.distance = static_cast<int>(word.size());  // distance to ""
    rw.hyp_log_prob = -std::numeric_limits<double>::infinity();
    if (hyps.empty()) {
      rw.hyp_log_prob = 0.0;
    } else {
      rw.distance = std::numeric_limits<int>::max();
      for (const Hypothesis& h : hyps) {
        const int d = levenshtein(word, h.letters);
        if (d < rw.distance ||
            (d == rw.distance && h.log_prob > rw.hyp_log_prob)) {
          rw.distance = d;
          rw.hyp_log_prob = h.log_prob;
        }
      }
    }
    ranked.push_back(std::move(rw));
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const RankedWord& a, const RankedWord& b) {
              if (a.distance != b.distance) return a.distance < b.distance;
              if (a.hyp_log_prob != b.hyp_log_prob)
                return a.hyp_log_prob > b.hyp_log_prob;
              return a.word < b.word;
            });
  if (static_cast<int>(ranked.size()) > n) ranked.resize(n);
  return ranked;
}

}  // namespace earkey::decode
