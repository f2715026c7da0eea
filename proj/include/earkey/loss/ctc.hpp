#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "earkey/common.hpp"
#include "earkey/nn/autodiff.hpp"

namespace earkey::loss {

using nn::Mat;

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

inline double log_add(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-(std::abs(a - b))));
}

// Minimum frame count for a label sequence: one frame per label plus one
// separating blank per adjacent repeat.
inline long ctc_min_frames(const std::vector<int>& labels) {
  long t = static_cast<long>(labels.size());
  for (size_t i = 1; i < labels.size(); ++i)
    if (labels[i] == labels[i - 1]) ++t;
  return t;
}

inline bool ctc_feasible(const std::vector<int>& labels, long frames) {
  return frames >= std::max<long>(ctc_min_frames(labels), 1);
}

struct CtcResult {
  double value = 0.0;  // -log P(labels | log_probs); +inf when infeasible
  Mat grad;            // d value / d log_probs, zero when infeasible
  bool feasible = true;
};

// Forward-backward CTC over the blank-augmented label sequence, entirely in
// log space. log_probs is K x T with one log-distribution per column; labels
// take values in [0, K-1) and blank is the last class.
inline CtcResult ctc_loss(const Mat& log_probs, const std::vector<int>& labels,
                          int blank = -1) {
  const int num_classes = static_cast<int>(log_probs.rows());
  const long frames = log_probs.cols();
  if (blank < 0) blank = num_classes - 1;
  for (int l : labels)
    if (l < 0 || l >= num_classes || l == blank)
      throw ConfigError("ctc_loss: label outside the letter alphabet");

  CtcResult res;
  res.grad = Mat::Zero(num_classes, frames);
  if (!ctc_feasible(labels, frames)) {
    res.value = std::numeric_limits<double>::infinity();
    res.feasible = false;
    return res;
  }

  const long u = static_cast<long>(labels.size());
  const long s_len = 2 * u + 1;
  std::vector<int> aug(s_len, blank);
  for (long i = 0; i < u; ++i) aug[2 * i + 1] = labels[i];

  auto lp = [&](long s, long t) { return log_probs(aug[s], t); };
  auto can_skip = [&](long s) {
    return s >= 2 && aug[s] != blank && aug[s] != aug[s - 2];
  };

  Mat alpha = Mat::Constant(s_len, frames, kLogZero);
  alpha(0, 0) = lp(0, 0);
  if (s_len > 1) alpha(1, 0) = lp(1, 0);
  for (long t = 1; t < frames; ++t) {
    for (long s = 0; s < s_len; ++s) {
      double acc = alpha(s, t - 1);
      if (s >= 1) acc = log_add(acc, alpha(s - 1, t - 1));
      if (can_skip(s)) acc = log_add(acc, alpha(s - 2, t - 1));
      if (acc != kLogZero) alpha(s, t) = acc + lp(s, t);
    }
  }
  double log_p = alpha(s_len - 1, frames - 1);
  if (s_len > 1) log_p = log_add(log_p, alpha(s_len - 2, frames - 1));
  if (log_p == kLogZero) {
    // Unreachable for feasible instances with finite log-probs, but a fully
    // -inf column can starve every path.
    res.value = std::numeric_limits<double>::infinity();
    res.feasible = false;
    return res;
  }
  res.value = -log_p;

  Mat beta = Mat::Constant(s_len, frames, kLogZero);
  beta(s_len - 1, frames - 1) = lp(s_len - 1, frames - 1);
  if (s_len > 1) beta(s_len - 2, frames - 1) = lp(s_len - 2, frames - 1);
  for (long t = frames - 2; t >= 0; --t) {
    for (long s = 0; s < s_len; ++s) {
      double acc = beta(s, t + 1);
      if (s + 1 < s_len) acc = log_add(acc, beta(s + 1, t + 1));
      if (s + 2 < s_len && can_skip(s + 2)) acc = log_add(acc, beta(s + 2, t + 1));
      if (acc != kLogZero) beta(s, t) = acc + lp(s, t);
    }
  }

  // d(-log P)/d log_probs(k, t): occupancy of class k at frame t.
  for (long t = 0; t < frames; ++t) {
    std::vector<double> per_class(num_classes, kLogZero);
    for (long s = 0; s < s_len; ++s) {
      if (alpha(s, t) == kLogZero || beta(s, t) == kLogZero) continue;
      per_class[aug[s]] =
          log_add(per_class[aug[s]], alpha(s, t) + beta(s, t) - lp(s, t));
    }
    for (int k = 0; k < num_classes; ++k)
      if (per_class[k] != kLogZero)
        res.grad(k, t) = -std::exp(per_class[k] - log_p);
  }
  return res;
}

// Letter-string front end for the 27-class production alphabet.
inline std::vector<int> word_to_labels(const std::string& word) {
  std::vector<int> labels;
  labels.reserve(word.size());
  for (char c : word) labels.push_back(letter_to_class(c));
  return labels;
}

inline CtcResult ctc_loss(const Mat& log_probs, const std::string& word) {
  return ctc_loss(log_probs, word_to_labels(word), kBlank);
}

// Tape node wrapping the dynamic-programming gradient.
inline int ctc_node(nn::Tape& tape, int log_probs,
                    const std::vector<int>& labels, int blank = -1) {
  CtcResult r = ctc_loss(tape.val(log_probs), labels, blank);
  if (!r.feasible)
    throw ConfigError("ctc_node: infeasible target for this frame count");
  return tape.custom_scalar(log_probs, r.value, std::move(r.grad));
}

}  // namespace earkey::loss
