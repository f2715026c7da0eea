#pragma once

#include <array>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "earkey/auth/metrics.hpp"
#include "earkey/io/config.hpp"
#include "earkey/loss/losses.hpp"
#include "earkey/train/feature_store.hpp"

namespace earkey::train {

struct LossRow {
  long step = 0;
  double l_cl = 0, l_auth = 0, l_ctc = 0, l_total = 0;
};

struct TrainStats {
  std::vector<LossRow> losses;
  int skipped_batches = 0;
  int infeasible_ctc = 0;
  auth::Threshold threshold;
  auth::ScoreMode score_mode = auth::ScoreMode::kLivePair;
};

// Multi-task trainer for one genuine user. Batches hold 2N word-matched
// segments per modality: columns 1..N from the genuine user, N+1..2N from
// attackers. The spelling head sees only the genuine half (user-dependent
// recognizer); the contrastive and authentication losses see both halves.
class Trainer {
 public:
  struct Batch {
    std::vector<std::string> words;
    std::vector<io::ManifestEntry> genuine;    // one per word
    std::vector<io::ManifestEntry> attackers;  // word-matched, other users
  };

  Trainer(const io::ExperimentConfig& cfg,
          const std::vector<io::ManifestEntry>& train_entries,
          FeatureStore& store, nn::Model& model)
      : cfg_(cfg), store_(store), model_(model) {
    for (const auto& e : train_entries) {
      if (e.user == cfg_.genuine_user)
        genuine_by_word_[e.word].push_back(e);
      else
        attacker_by_word_[e.word].push_back(e);
    }
    if (genuine_by_word_.empty())
      throw ConfigError("trainer: no training utterances for genuine user " +
                        cfg_.genuine_user);
    if (attacker_by_word_.empty())
      throw ConfigError("trainer: need attacker users in the training split");
    for (const auto& [word, _] : genuine_by_word_) words_.push_back(word);
  }

  std::vector<Batch> make_batches(uint64_t epoch) const {
    Rng rng = Rng(cfg_.seed).fork("epoch", epoch);
    std::vector<std::string> shuffled = words_;
    for (size_t i = shuffled.size(); i > 1; --i)
      std::swap(shuffled[i - 1], shuffled[rng.below(i)]);

    const size_t n = std::min<size_t>(cfg_.batch_words, shuffled.size());
    std::vector<Batch> batches;
    for (size_t start = 0; start < shuffled.size(); start += n) {
      Batch b;
      for (size_t i = start; i < std::min(start + n, shuffled.size()); ++i) {
        const std::string& word = shuffled[i];
        auto att = attacker_by_word_.find(word);
        if (att == attacker_by_word_.end() || att->second.empty()) {
          b.words.clear();
          break;  // missing word-matched attacker: skip the whole batch
        }
        const auto& gen = genuine_by_word_.at(word);
        b.words.push_back(word);
        b.genuine.push_back(gen[rng.below(gen.size())]);
        b.attackers.push_back(att->second[rng.below(att->second.size())]);
      }
      if (!b.words.empty()) batches.push_back(std::move(b));
    }
    return batches;
  }

  TrainStats run() {
    TrainStats stats;
    stats.score_mode = auth::parse_score_mode(cfg_.score_mode);
    long step = 0;
    for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
      const std::vector<Batch> batches = make_batches(epoch);
      if (batches.empty()) ++stats.skipped_batches;
      for (const Batch& batch : batches) {
        LossRow row = train_step(batch, stats);
        row.step = step++;
        stats.losses.push_back(row);
      }
    }
    calibrate(stats);
    return stats;
  }

 private:
  LossRow train_step(const Batch& batch, TrainStats& stats) {
    const nn::EncoderConfig& ecfg = model_.config();
    nn::GraphBuilder g(model_.params());
    nn::Tape& t = g.tape();
    const size_t n = batch.words.size();

    std::vector<int> wg, ug, wa, w_auth, u_pos, u_neg;
    std::vector<int> ctc_nodes;
    int infeasible = 0;
    for (size_t i = 0; i < n; ++i) {
      const pipeline::Features& gf = store_.get(batch.genuine[i]);
      pipeline::UtteranceNodes gn = pipeline::build_utterance_nodes(g, ecfg, gf);
      wg.push_back(gn.proj_w);
      ug.push_back(gn.proj_u);
      w_auth.push_back(gn.auth_w);
      u_pos.push_back(gn.auth_u);

      const auto labels = loss::word_to_labels(batch.words[i]);
      const long frames = t.val(gn.shared_w).cols();
      if (loss::ctc_feasible(labels, frames)) {
        const int spell = pipeline::build_spell_node(g, ecfg, gn);
        ctc_nodes.push_back(loss::ctc_node(t, spell, labels, kBlank));
      } else {
        ++infeasible;
      }

      const pipeline::Features& af = store_.get(batch.attackers[i]);
      pipeline::UtteranceNodes an = pipeline::build_utterance_nodes(g, ecfg, af);
      wa.push_back(an.proj_w);  // completes the 2N batch layout
      u_neg.push_back(an.auth_u);
    }
    stats.infeasible_ctc += infeasible;
    if (infeasible > 0)
      std::cerr << "warning: " << infeasible
                << " CTC-infeasible utterances skipped in a batch\n";

    loss::LossWeights weights{cfg_.alpha, cfg_.beta, cfg_.gamma, cfg_.margin};
    const int l_cl =
        loss::clwum_node(t, t.concat_cols(wg), t.concat_cols(ug), cfg_.tau);
    const int l_auth = loss::angular_triplet_node(
        t, t.concat_cols(w_auth), t.concat_cols(u_pos), t.concat_cols(u_neg),
        cfg_.margin);
    int l_ctc;
    if (ctc_nodes.empty()) {
      l_ctc = t.leaf(nn::Mat::Zero(1, 1));
    } else {
      int sum = ctc_nodes[0];
      for (size_t i = 1; i < ctc_nodes.size(); ++i)
        sum = t.add(sum, ctc_nodes[i]);
      l_ctc = t.scale(sum, 1.0 / static_cast<double>(ctc_nodes.size()));
    }
    const int l_total = loss::total_node(t, l_cl, l_auth, l_ctc, weights);

    t.backward(l_total);
    for (auto& [name, tensor] : model_.params().tensors()) {
      nn::Mat grad = g.param_grad(name);
      auto [it, inserted] = velocity_.try_emplace(
          name, nn::Mat::Zero(tensor.rows(), tensor.cols()));
      it->second = cfg_.momentum * it->second - cfg_.lr * grad;
      tensor += it->second;
    }

    LossRow row;
    row.l_cl = t.val(l_cl)(0, 0);
    row.l_auth = t.val(l_auth)(0, 0);
    row.l_ctc = t.val(l_ctc)(0, 0);
    row.l_total = t.val(l_total)(0, 0);
    return row;
  }

  // Threshold calibration on train-split scores only.
  void calibrate(TrainStats& stats) {
    auth::ReferenceSet refs;
    refs.user_id = cfg_.genuine_user;
    if (stats.score_mode == auth::ScoreMode::kReferenceMatch) {
      std::vector<pipeline::Features> reg;
      for (const auto& [word, entries] : genuine_by_word_)
        for (const auto& e : entries) reg.push_back(store_.get(e));
      refs = pipeline::enroll(model_, cfg_.genuine_user, reg);
    }

    std::vector<double> genuine_scores, impostor_scores;
    for (const auto& [word, entries] : genuine_by_word_)
      for (const auto& e : entries) {
        pipeline::UtteranceEmbeddings emb =
            pipeline::embed_utterance(model_, store_.get(e));
        genuine_scores.push_back(
            auth::score(emb.auth_w, emb.auth_u, refs, stats.score_mode));
      }
    for (const auto& [word, entries] : attacker_by_word_)
      for (const auto& e : entries) {
        pipeline::UtteranceEmbeddings emb =
            pipeline::embed_utterance(model_, store_.get(e));
        impostor_scores.push_back(
            auth::score(emb.auth_w, emb.auth_u, refs, stats.score_mode));
      }
    stats.threshold = auth::calibrate_threshold(genuine_scores, impostor_scores);
  }

  io::ExperimentConfig cfg_;
  FeatureStore& store_;
  nn::Model& model_;
  std::map<std::string, std::vector<io::ManifestEntry>> genuine_by_word_;
  std::map<std::string, std::vector<io::ManifestEntry>> attacker_by_word_;
  std::vector<std::string> words_;
  std::map<std::string, nn::Mat> velocity_;
};

}  // namespace earkey::train
