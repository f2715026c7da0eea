#pragma once

#include <string>
#include <vector>

#include "earkey/auth/verify.hpp"
#include "earkey/dsp/frontend.hpp"
#include "earkey/nn/model.hpp"

namespace earkey::pipeline {

using nn::Mat;
using Vec = Eigen::VectorXd;
using Features = std::vector<dsp::FeaturePair>;

// Per-window feature columns for the ultrasonic encoder: one AR vector per
// window.
inline Mat ultra_matrix(const Features& features, int ar_order) {
  if (features.empty()) throw DataError("ultra_matrix: no windows");
  Mat x(ar_order, static_cast<long>(features.size()));
  for (size_t t = 0; t < features.size(); ++t) {
    if (features[t].ar.size() != ar_order)
      throw ConfigError("ultra_matrix: AR order mismatch");
    x.col(static_cast<long>(t)) = features[t].ar;
  }
  return x;
}

// Whisper columns: the 10 x n_mels patch flattened frame-major, one column
// per window (keeps the two modalities window-synchronous).
inline Mat whisper_matrix(const Features& features, int n_mels) {
  if (features.empty()) throw DataError("whisper_matrix: no windows");
  const int width = kFramesPerWindow * n_mels;
  Mat x(width, static_cast<long>(features.size()));
  for (size_t t = 0; t < features.size(); ++t) {
    const Mat& patch = features[t].mel;
    if (patch.rows() != kFramesPerWindow || patch.cols() != n_mels)
      throw ConfigError("whisper_matrix: mel patch shape mismatch");
    for (long f = 0; f < patch.rows(); ++f)
      for (long m = 0; m < patch.cols(); ++m)
        x(f * n_mels + m, static_cast<long>(t)) = patch(f, m);
  }
  return x;
}

// Tape nodes for one utterance: shared embeddings, pooled head vectors.
struct UtteranceNodes {
  int shared_w = -1;  // d x T
  int shared_u = -1;
  int proj_w = -1;    // contrastive head, unit norm, d x 1
  int proj_u = -1;
  int auth_w = -1;    // authentication head, d x 1
  int auth_u = -1;
};

inline UtteranceNodes build_utterance_nodes(nn::GraphBuilder& g,
                                            const nn::EncoderConfig& cfg,
                                            const Features& features) {
  UtteranceNodes n;
  const Mat xu = ultra_matrix(features, cfg.ar_order);
  const Mat xw = whisper_matrix(features, cfg.n_mels);
  n.shared_w = nn::encoder_forward(g, cfg, g.input(xw), nn::Modality::kWhisper);
  n.shared_u =
      nn::encoder_forward(g, cfg, g.input(xu), nn::Modality::kUltrasonic);
  const int pooled_w = nn::mean_pool(g, n.shared_w);
  const int pooled_u = nn::mean_pool(g, n.shared_u);
  n.proj_w = nn::project(g, cfg, pooled_w, nn::Head::kContrastive,
                         nn::Modality::kWhisper);
  n.proj_u = nn::project(g, cfg, pooled_u, nn::Head::kContrastive,
                         nn::Modality::kUltrasonic);
  n.auth_w =
      nn::project(g, cfg, pooled_w, nn::Head::kAuth, nn::Modality::kWhisper);
  n.auth_u =
      nn::project(g, cfg, pooled_u, nn::Head::kAuth, nn::Modality::kUltrasonic);
  return n;
}

// Spelling log-probs (27 x T) for one utterance's nodes.
inline int build_spell_node(nn::GraphBuilder& g, const nn::EncoderConfig& cfg,
                            const UtteranceNodes& nodes) {
  const int c = nn::concat_embeddings(g, nodes.shared_w, nodes.shared_u);
  return nn::spell_logits(g, cfg, c);
}

// Forward-only evaluation of one utterance.
struct UtteranceEmbeddings {
  Mat shared_w, shared_u;  // d x T
  Vec proj_w, proj_u;
  Vec auth_w, auth_u;
  Mat log_probs;  // 27 x T
};

inline UtteranceEmbeddings embed_utterance(const nn::Model& model,
                                           const Features& features) {
  nn::GraphBuilder g(model.params());
  const UtteranceNodes n = build_utterance_nodes(g, model.config(), features);
  const int spell = build_spell_node(g, model.config(), n);
  UtteranceEmbeddings out;
  out.shared_w = g.tape().val(n.shared_w);
  out.shared_u = g.tape().val(n.shared_u);
  out.proj_w = g.tape().val(n.proj_w).col(0);
  out.proj_u = g.tape().val(n.proj_u).col(0);
  out.auth_w = g.tape().val(n.auth_w).col(0);
  out.auth_u = g.tape().val(n.auth_u).col(0);
  out.log_probs = g.tape().val(spell);
  return out;
}

// Registration: one authentication-vector pair per enrolled utterance.
inline auth::ReferenceSet enroll(const nn::Model& model,
                                 const std::string& user_id,
                                 const std::vector<Features>& utterances,
                                 uint64_t created_at = 0) {
  if (utterances.empty()) throw ConfigError("enroll: need >= 1 utterance");
  auth::ReferenceSet refs;
  refs.user_id = user_id;
  refs.created_at = created_at;
  for (const Features& f : utterances) {
    UtteranceEmbeddings e = embed_utterance(model, f);
    refs.pairs.emplace_back(e.auth_w, e.auth_u);
  }
  return refs;
}

}  // namespace earkey::pipeline
