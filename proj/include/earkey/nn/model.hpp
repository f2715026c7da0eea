#pragma once

#include <array>
#include <string>
#include <unordered_map>
#include <vector>

#include "earkey/common.hpp"
#include "earkey/nn/autodiff.hpp"
#include "earkey/nn/params.hpp"

namespace earkey::nn {

enum class Modality { kWhisper, kUltrasonic };
enum class Head { kContrastive, kAuth };

inline const char* modality_prefix(Modality m) {
  return m == Modality::kWhisper ? "w" : "u";
}

struct EncoderConfig {
  int ar_order = 200;  // ultrasonic feature width
  int n_mels = 64;     // whisper patch flattens to frames_per_window * n_mels
  int channels = 128;  // TCN width
  int hidden = 128;    // GRU hidden size per direction
  int embed_dim = 128; // shared embedding d
  int spell_hidden = 128;
  int kernel = 3;
  std::array<int, 3> dilations{1, 2, 4};

  int input_dim(Modality m) const {
    return m == Modality::kWhisper ? kFramesPerWindow * n_mels : ar_order;
  }
};

// Two modality encoders (TCN -> Bi-GRU -> embedding layer), per-modality
// contrastive and authentication heads, and the shared spelling head.
class Model {
 public:
  Model(const EncoderConfig& cfg, uint64_t seed) : cfg_(cfg), store_(seed) {
    for (Modality m : {Modality::kWhisper, Modality::kUltrasonic}) {
      const std::string p = modality_prefix(m);
      int in = cfg.input_dim(m);
      for (int blk = 0; blk < 3; ++blk) {
        const std::string base = p + ".tcn" + std::to_string(blk) + ".";
        for (int k = 0; k < cfg.kernel; ++k)
          store_.add(base + "w" + std::to_string(k), cfg.channels, in);
        store_.add(base + "b", cfg.channels, 1, true);
        if (in != cfg.channels) store_.add(base + "proj", cfg.channels, in);
        in = cfg.channels;
      }
      int gru_in = cfg.channels;
      for (int layer = 0; layer < 2; ++layer) {
        for (const char* dir : {"f", "b"}) {
          const std::string base =
              p + ".gru" + std::to_string(layer) + "." + dir + ".";
          store_.add(base + "wx", 3 * cfg.hidden, gru_in);
          store_.add(base + "uh", 3 * cfg.hidden, cfg.hidden);
          store_.add(base + "bias", 3 * cfg.hidden, 1, true);
        }
        gru_in = 2 * cfg.hidden;
      }
      store_.add(p + ".embed.w", cfg.embed_dim, 2 * cfg.hidden);
      store_.add(p + ".embed.b", cfg.embed_dim, 1, true);
      for (const char* head : {"proj", "auth"}) {
        const std::string base = p + "." + head + ".";
        store_.add(base + "w1", cfg.embed_dim, cfg.embed_dim);
        store_.add(base + "b1", cfg.embed_dim, 1, true);
        store_.add(base + "w2", cfg.embed_dim, cfg.embed_dim);
        store_.add(base + "b2", cfg.embed_dim, 1, true);
      }
    }
    store_.add("spell.w1", cfg.spell_hidden, 2 * cfg.embed_dim);
    store_.add("spell.b1", cfg.spell_hidden, 1, true);
    store_.add("spell.w2", kNumClasses, cfg.spell_hidden);
    store_.add("spell.b2", kNumClasses, 1, true);
  }

  const EncoderConfig& config() const { return cfg_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }

 private:
  EncoderConfig cfg_;
  ParamStore store_;
};

// One forward build: parameters enter the tape lazily as leaves, so
// gradients can be read back per name after backward().
class GraphBuilder {
 public:
  explicit GraphBuilder(const ParamStore& store) : store_(&store) {}

  Tape& tape() { return tape_; }

  int param(const std::string& name) {
    auto it = leaves_.find(name);
    if (it != leaves_.end()) return it->second;
    const int id = tape_.leaf(store_->get(name));
    leaves_.emplace(name, id);
    return id;
  }

  int input(Mat v) { return tape_.leaf(std::move(v)); }

  const std::unordered_map<std::string, int>& param_leaves() const {
    return leaves_;
  }

  // Gradient of a parameter after backward(); zero if untouched.
  Mat param_grad(const std::string& name) {
    auto it = leaves_.find(name);
    if (it == leaves_.end() || !tape_.has_grad(it->second))
      return Mat::Zero(store_->get(name).rows(), store_->get(name).cols());
    return tape_.grad(it->second);
  }

 private:
  Tape tape_;
  const ParamStore* store_;
  std::unordered_map<std::string, int> leaves_;
};

namespace detail {

// Causal dilated conv, kernel k: y[:,t] = sum_j Wj x[:, t-(k-1-j)*d] + b.
inline int causal_conv(GraphBuilder& g, int x, const std::string& base,
                       int kernel, int dilation) {
  Tape& t = g.tape();
  int acc = -1;
  for (int j = 0; j < kernel; ++j) {
    const long shift = static_cast<long>(kernel - 1 - j) * dilation;
    int xin = shift == 0 ? x : t.shift_cols(x, shift);
    int term = t.matmul(g.param(base + "w" + std::to_string(j)), xin);
    acc = acc < 0 ? term : t.add(acc, term);
  }
  return t.add_bias(acc, g.param(base + "b"));
}

inline int tcn_block(GraphBuilder& g, int x, const std::string& base,
                     int kernel, int dilation, bool needs_proj) {
  Tape& t = g.tape();
  int h = t.relu(causal_conv(g, x, base, kernel, dilation));
  int res = needs_proj ? t.matmul(g.param(base + "proj"), x) : x;
  return t.add(h, res);
}

// One GRU direction over the whole sequence; returns hidden states H x T.
inline int gru_direction(GraphBuilder& g, int x, const std::string& base,
                         int hidden) {
  Tape& t = g.tape();
  const long T = t.val(x).cols();
  int xp = t.add_bias(t.matmul(g.param(base + "wx"), x), g.param(base + "bias"));
  int xz = t.slice_rows(xp, 0, hidden);
  int xr = t.slice_rows(xp, hidden, hidden);
  int xn = t.slice_rows(xp, 2 * hidden, hidden);
  int uh = g.param(base + "uh");
  int uz = t.slice_rows(uh, 0, hidden);
  int ur = t.slice_rows(uh, hidden, hidden);
  int un = t.slice_rows(uh, 2 * hidden, hidden);

  int h = g.input(Mat::Zero(hidden, 1));
  int ones = g.input(Mat::Ones(hidden, 1));
  std::vector<int> outputs;
  outputs.reserve(T);
  for (long step = 0; step < T; ++step) {
    int z = t.sigmoid(t.add(t.slice_cols(xz, step, 1), t.matmul(uz, h)));
    int r = t.sigmoid(t.add(t.slice_cols(xr, step, 1), t.matmul(ur, h)));
    int n = t.tanh_(
        t.add(t.slice_cols(xn, step, 1), t.mul(r, t.matmul(un, h))));
    h = t.add(t.mul(z, h), t.mul(t.sub(ones, z), n));
    outputs.push_back(h);
  }
  return t.concat_cols(outputs);
}

inline int bigru_layer(GraphBuilder& g, int x, const std::string& base,
                       int hidden) {
  Tape& t = g.tape();
  int fwd = gru_direction(g, x, base + ".f.", hidden);
  int bwd_rev = gru_direction(g, t.reverse_cols(x), base + ".b.", hidden);
  int bwd = t.reverse_cols(bwd_rev);
  return t.concat_rows(fwd, bwd);
}

}  // namespace detail

// Shared encoder: per-window feature columns in, d-dimensional embedding
// columns out (d x T).
inline int encoder_forward(GraphBuilder& g, const EncoderConfig& cfg, int x,
                           Modality modality) {
  Tape& t = g.tape();
  if (t.val(x).rows() != cfg.input_dim(modality))
    throw ConfigError("encoder_forward: feature width does not match modality");
  if (t.val(x).cols() < 1)
    throw ConfigError("encoder_forward: need at least one window");
  const std::string p = modality_prefix(modality);

  int h = x;
  int in_dim = cfg.input_dim(modality);
  for (int blk = 0; blk < 3; ++blk) {
    const std::string base = p + ".tcn" + std::to_string(blk) + ".";
    h = detail::tcn_block(g, h, base, cfg.kernel, cfg.dilations[blk],
                          in_dim != cfg.channels);
    in_dim = cfg.channels;
  }
  h = detail::bigru_layer(g, h, p + ".gru0", cfg.hidden);
  h = detail::bigru_layer(g, h, p + ".gru1", cfg.hidden);
  return t.add_bias(t.matmul(g.param(p + ".embed.w"), h),
                    g.param(p + ".embed.b"));
}

inline int mean_pool(GraphBuilder& g, int h) { return g.tape().mean_cols(h); }

// Head over a pooled d-vector. The contrastive head is L2-normalized for the
// cosine similarities downstream.
inline int project(GraphBuilder& g, const EncoderConfig& cfg, int h, Head head,
                   Modality modality) {
  Tape& t = g.tape();
  if (t.val(h).rows() != cfg.embed_dim || t.val(h).cols() != 1)
    throw ConfigError("project: expected a pooled d-vector");
  if (!t.val(h).allFinite()) throw ConfigError("project: non-finite input");
  const std::string base = std::string(modality_prefix(modality)) + "." +
                           (head == Head::kContrastive ? "proj" : "auth") + ".";
  int z = t.add_bias(t.matmul(g.param(base + "w1"), h), g.param(base + "b1"));
  z = t.relu(z);
  z = t.add_bias(t.matmul(g.param(base + "w2"), z), g.param(base + "b2"));
  if (head == Head::kContrastive) z = t.l2_normalize_cols(z);
  return z;
}

// Window-synchronous concatenation c_t = [h_t^w ; h_t^u].
inline int concat_embeddings(GraphBuilder& g, int h_w, int h_u) {
  Tape& t = g.tape();
  if (t.val(h_w).cols() != t.val(h_u).cols())
    throw ConfigError("concat_embeddings: sequence length mismatch");
  return t.concat_rows(h_w, h_u);
}

// Per-window log-probabilities over the 27 classes (columns sum to one in
// probability space).
inline int spell_logits(GraphBuilder& g, const EncoderConfig& cfg, int c) {
  Tape& t = g.tape();
  if (t.val(c).rows() != 2 * cfg.embed_dim)
    throw ConfigError("spell_logits: expected 2d-dimensional inputs");
  int z = t.add_bias(t.matmul(g.param("spell.w1"), c), g.param("spell.b1"));
  z = t.relu(z);
  z = t.add_bias(t.matmul(g.param("spell.w2"), z), g.param("spell.b2"));
  return t.log_softmax_cols(z);
}

}  // namespace earkey::nn
