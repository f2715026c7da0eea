#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "earkey/auth/metrics.hpp"
#include "earkey/decode/lexicon.hpp"
#include "earkey/io/config.hpp"
#include "earkey/train/feature_store.hpp"
#include "earkey/train/split.hpp"

namespace earkey::train {

struct UserEval {
  double top1 = 0, top2 = 0, top3 = 0;
  double tpr = 0, fpr = 0, eer = 0;
  long genuine_trials = 0;
  long attack_trials = 0;
  double threshold = 0;
};

struct EvalReport {
  std::map<std::string, UserEval> per_user;
  std::string config_fingerprint;
};

// Word ranking hook; the default runs beam search plus lexicon rescoring.
// Tests may inject an oracle ranker for harness sanity checks.
using WordRanker = std::function<std::vector<decode::RankedWord>(
    const io::ManifestEntry&, const nn::Mat& log_probs)>;

inline WordRanker default_ranker(const decode::Lexicon& lexicon, int beam_width,
                                 int n_best) {
  return [lexicon, beam_width, n_best](const io::ManifestEntry&,
                                       const nn::Mat& log_probs) {
    auto hyps = decode::beam_decode(log_probs, beam_width, n_best);
    return decode::lexicon_topn(hyps, lexicon, 3);
  };
}

// Leave-one-session-out evaluation of one target (genuine) user: Top-n word
// accuracy on their held-out session, verification over genuine trials plus
// every other user's held-out utterances as attack trials.
inline UserEval evaluate_target(const nn::Model& model,
                                const std::string& genuine_user, double thr,
                                auth::ScoreMode mode,
                                const auth::ReferenceSet& refs,
                                const Split& split, FeatureStore& store,
                                const WordRanker& ranker) {
  UserEval ev;
  ev.threshold = thr;

  std::vector<double> genuine_scores, attack_scores;
  for (const io::ManifestEntry& e : split.test) {
    const pipeline::Features& f = store.get(e);
    pipeline::UtteranceEmbeddings emb = pipeline::embed_utterance(model, f);
    const double s = auth::score(emb.auth_w, emb.auth_u, refs, mode);

    if (e.user == genuine_user) {
      ++ev.genuine_trials;
      genuine_scores.push_back(s);
      auto ranked = ranker(e, emb.log_probs);
      for (size_t r = 0; r < ranked.size() && r < 3; ++r) {
        if (ranked[r].word != e.word) continue;
        if (r < 1) ev.top1 += 1;
        if (r < 2) ev.top2 += 1;
        if (r < 3) ev.top3 += 1;
        break;
      }
    } else {
      ++ev.attack_trials;
      attack_scores.push_back(s);
    }
  }
  if (ev.genuine_trials == 0) throw DataError("evaluate: empty test split");

  ev.top1 /= ev.genuine_trials;
  ev.top2 /= ev.genuine_trials;
  ev.top3 /= ev.genuine_trials;

  long tp = 0;
  for (double s : genuine_scores)
    if (s > thr) ++tp;
  ev.tpr = static_cast<double>(tp) / ev.genuine_trials;
  if (!attack_scores.empty()) {
    long fa = 0;
    for (double s : attack_scores)
      if (s > thr) ++fa;
    ev.fpr = static_cast<double>(fa) / ev.attack_trials;
    ev.eer = auth::auth_metrics(genuine_scores, attack_scores).eer;
  }
  return ev;
}

}  // namespace earkey::train
