#pragma once

#include <cmath>
#include <vector>

#include "earkey/common.hpp"
#include "earkey/loss/ctc.hpp"
#include "earkey/nn/autodiff.hpp"

namespace earkey::loss {

using nn::Mat;
using nn::Tape;

// Task weights and the triplet margin. The margin default of 0.2 rad
// (~11.45 degrees) is configurable.
struct LossWeights {
  double alpha = 0.1;
  double beta = 0.5;
  double gamma = 0.3;
  double margin = 0.2;
};

namespace detail {

inline void check_embeddings(const Mat& m, const char* what) {
  if (m.cols() < 1) throw ConfigError(std::string(what) + ": need N >= 1");
  for (long j = 0; j < m.cols(); ++j)
    if (m.col(j).norm() == 0.0)
      throw DataError(std::string(what) + ": zero-norm column");
}

}  // namespace detail

// Contrastive loss over genuine pairs:
//   L = -(1/N) sum_i log( exp(S_ii/tau) / sum_j exp(S_ij/tau) ),
// S the cosine-similarity matrix of the two embedding sets.
inline int clwum_node(Tape& t, int w_genuine, int u_genuine, double tau) {
  if (!(tau > 0.0)) throw ConfigError("clwum: tau must be positive");
  const Mat& w = t.val(w_genuine);
  const Mat& u = t.val(u_genuine);
  if (w.rows() != u.rows() || w.cols() != u.cols())
    throw ConfigError("clwum: embedding sets must share shape");
  detail::check_embeddings(w, "clwum");
  detail::check_embeddings(u, "clwum");

  int wn = t.l2_normalize_cols(w_genuine);
  int un = t.l2_normalize_cols(u_genuine);
  int sim = t.matmul(t.transpose(wn), un);  // S_ij = cos(w_i, u_j)
  int scaled = t.scale(sim, 1.0 / tau);
  int lse = t.logsumexp_rows(scaled);
  int diag = t.diag_as_row(scaled);
  return t.sub(t.mean_all(lse), t.mean_all(diag));
}

// Angular triplet loss with the hardest attacker negative per anchor:
//   L = (1/N) sum_i max(0, m + arccos(s_i+) - arccos(s_i-)).
inline int angular_triplet_node(Tape& t, int w, int u_pos, int u_neg,
                                double margin) {
  const Mat& wv = t.val(w);
  const Mat& up = t.val(u_pos);
  const Mat& un = t.val(u_neg);
  if (wv.cols() != up.cols() || wv.cols() != un.cols())
    throw ConfigError("angular_triplet: N mismatch across embedding sets");
  detail::check_embeddings(wv, "angular_triplet");
  detail::check_embeddings(up, "angular_triplet");
  detail::check_embeddings(un, "angular_triplet");

  int wn = t.l2_normalize_cols(w);
  int upn = t.l2_normalize_cols(u_pos);
  int unn = t.l2_normalize_cols(u_neg);

  int s_pos = t.colwise_dot(wn, upn);                 // 1 x N
  int sim_neg = t.matmul(t.transpose(wn), unn);       // N x N

  const Mat& sn = t.val(sim_neg);
  std::vector<long> hardest(sn.rows());
  for (long i = 0; i < sn.rows(); ++i) {
    long best = 0;
    sn.row(i).maxCoeff(&best);
    hardest[i] = best;
  }
  int s_neg = t.gather_cols_rowwise(sim_neg, std::move(hardest));  // 1 x N

  int theta_pos = t.arccos_clamped(s_pos);
  int theta_neg = t.arccos_clamped(s_neg);
  int m_const = t.leaf(Mat::Constant(1, sn.rows(), margin));
  int hinge = t.relu(t.add(m_const, t.sub(theta_pos, theta_neg)));
  return t.mean_all(hinge);
}

// L_total = alpha L_CL + beta L_auth + gamma L_CTC.
inline int total_node(Tape& t, int l_cl, int l_auth, int l_ctc,
                      const LossWeights& w) {
  return t.add(t.scale(l_cl, w.alpha),
               t.add(t.scale(l_auth, w.beta), t.scale(l_ctc, w.gamma)));
}

inline double total_loss(double l_cl, double l_auth, double l_ctc,
                         const LossWeights& w) {
  return w.alpha * l_cl + w.beta * l_auth + w.gamma * l_ctc;
}

// ---- standalone value+gradient wrappers ----

struct PairLossResult {
  double value = 0.0;
  Mat grad_w, grad_u;
};

inline PairLossResult clwum_loss(const Mat& w_genuine, const Mat& u_genuine,
                                 double tau) {
  Tape t;
  int w = t.leaf(w_genuine);
  int u = t.leaf(u_genuine);
  int l = clwum_node(t, w, u, tau);
  t.backward(l);
  return {t.val(l)(0, 0), t.grad(w), t.grad(u)};
}

struct TripletLossResult {
  double value = 0.0;
  Mat grad_w, grad_u_pos, grad_u_neg;
};

inline TripletLossResult angular_triplet_loss(const Mat& w, const Mat& u_pos,
                                              const Mat& u_neg, double margin) {
  Tape t;
  int wi = t.leaf(w);
  int up = t.leaf(u_pos);
  int un = t.leaf(u_neg);
  int l = angular_triplet_node(t, wi, up, un, margin);
  t.backward(l);
  return {t.val(l)(0, 0), t.grad(wi), t.grad(up), t.grad(un)};
}

}  // namespace earkey::loss
