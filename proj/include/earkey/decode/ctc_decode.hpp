#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "earkey/common.hpp"
#include "earkey/loss/ctc.hpp"

namespace earkey::decode {

using Mat = Eigen::MatrixXd;

struct Hypothesis {
  std::string letters;
  double log_prob = 0.0;
  int rank = 0;  // 1-based
};

// Per-frame argmax, collapse repeats, drop blanks. log_probs is K x T with
// one log-distribution per column; blank is the last class.
inline std::string greedy_decode(const Mat& log_probs, int blank = -1) {
  const int k = static_cast<int>(log_probs.rows());
  if (blank < 0) blank = k - 1;
  std::string out;
  int prev = -1;
  for (long t = 0; t < log_probs.cols(); ++t) {
    int best = 0;
    log_probs.col(t).maxCoeff(&best);
    if (best != prev && best != blank)
      out.push_back(static_cast<char>('a' + best));
    prev = best;
  }
  return out;
}

// Prefix beam search: alignments are merged into letter prefixes as the beam
// advances, so each hypothesis carries its total posterior. Deterministic;
// ties break lexicographically.
inline std::vector<Hypothesis> beam_decode(const Mat& log_probs, int width,
                                           int n_best, int blank = -1) {
  if (width < 1) throw ConfigError("beam_decode: width must be >= 1");
  if (n_best < 1 || n_best > width)
    throw ConfigError("beam_decode: need 1 <= n_best <= width");
  const int k = static_cast<int>(log_probs.rows());
  if (blank < 0) blank = k - 1;

  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  struct Score {
    double blank_lp = kNegInf;     // paths ending in blank
    double nonblank_lp = kNegInf;  // paths ending in the last letter
    double total() const { return loss::log_add(blank_lp, nonblank_lp); }
  };

  std::map<std::string, Score> beams;
  beams[""] = Score{0.0, kNegInf};

  for (long t = 0; t < log_probs.cols(); ++t) {
    std::map<std::string, Score> next;
    for (const auto& [prefix, sc] : beams) {
      const double total = sc.total();
      // Stay on the same prefix via a blank frame.
      Score& same = next[prefix];
      same.blank_lp = loss::log_add(same.blank_lp, total + log_probs(blank, t));
      // Repeat the last letter without an intervening blank.
      if (!prefix.empty()) {
        const int last = prefix.back() - 'a';
        same.nonblank_lp = loss::log_add(same.nonblank_lp,
                                         sc.nonblank_lp + log_probs(last, t));
      }
      for (int c = 0; c < k; ++c) {
        if (c == blank) continue;
        std::string ext = prefix + static_cast<char>('a' + c);
        Score& grown = next[ext];
        const double src = (!prefix.empty() && prefix.back() - 'a' == c)
                               ? sc.blank_lp  // same letter needs a blank gap
                               : total;
        grown.nonblank_lp = loss::log_add(grown.nonblank_lp, src + log_probs(c, t));
      }
    }
    // Prune to the beam width (total desc, then lexicographic).
    std::vector<std::pair<std::string, Score>> order(next.begin(), next.end());
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
      if (a.second.total() != b.second.total())
        return a.second.total() > b.second.total();
      return a.first < b.first;
    });
    beams.clear();
    for (const auto& [prefix, sc] : order) {
      if (static_cast<int>(beams.size()) >= width) break;
      if (sc.total() == kNegInf) continue;
      beams.emplace(prefix, sc);
    }
  }

  std::vector<std::pair<std::string, double>> finals;
  finals.reserve(beams.size());
  for (const auto& [prefix, sc] : beams) finals.emplace_back(prefix, sc.total());
  std::sort(finals.begin(), finals.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  std::vector<Hypothesis> out;
  for (const auto& [letters, lp] : finals) {
    if (static_cast<int>(out.size()) >= n_best) break;
    out.push_back({letters, lp, static_cast<int>(out.size()) + 1});
  }
  return out;
}

}  // namespace earkey::decode
