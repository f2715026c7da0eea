#include <gtest/gtest.h>

#include <cmath>

#include "earkey/nn/model.hpp"
#include "earkey/rng.hpp"
#include "oracles/fd_check.hpp"

using namespace earkey;
using namespace earkey::nn;

namespace {

EncoderConfig tiny_config() {
  EncoderConfig cfg;
  cfg.ar_order = 4;
  cfg.n_mels = 1;  // whisper width = 10
  cfg.channels = 3;
  cfg.hidden = 2;
  cfg.embed_dim = 3;
  cfg.spell_hidden = 4;
  return cfg;
}

Mat random_mat(Rng& rng, long r, long c, double scale = 1.0) {
  Mat m(r, c);
  for (long j = 0; j < c; ++j)
    for (long i = 0; i < r; ++i) m(i, j) = scale * rng.normal();
  return m;
}

double forward_scalar(const Model& model, const Mat& x, const Mat& probe_r) {
  GraphBuilder g(model.params());
  int xi = g.input(x);
  int h = encoder_forward(g, model.config(), xi, Modality::kUltrasonic);
  return g.tape().val(g.tape().sum_all(g.tape().mul(h, g.tape().leaf(probe_r))))(0, 0);
}

}  // namespace

TEST(Encoder, OutputShape) {
  EncoderConfig cfg;  // production widths
  Model model(cfg, 11);
  Rng rng(0);
  Mat x = random_mat(rng, cfg.ar_order, 5);
  GraphBuilder g(model.params());
  int h = encoder_forward(g, cfg, g.input(x), Modality::kUltrasonic);
  EXPECT_EQ(g.tape().val(h).rows(), 128);
  EXPECT_EQ(g.tape().val(h).cols(), 5);
  EXPECT_TRUE(g.tape().val(h).allFinite());
}

TEST(Encoder, WidthMismatchThrows) {
  Model model(tiny_config(), 1);
  Rng rng(0);
  Mat wrong = random_mat(rng, 7, 3);
  GraphBuilder g(model.params());
  EXPECT_THROW(
      encoder_forward(g, model.config(), g.input(wrong), Modality::kUltrasonic),
      ConfigError);
}

TEST(Encoder, ZeroWeightsZeroInputGiveZeroOutput) {
  EncoderConfig cfg = tiny_config();
  Model model(cfg, 1);
  for (auto& [name, m] : model.params().tensors()) m.setZero();
  GraphBuilder g(model.params());
  int h = encoder_forward(g, cfg, g.input(Mat::Zero(cfg.ar_order, 4)),
                          Modality::kUltrasonic);
  EXPECT_NEAR(g.tape().val(h).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(Encoder, GradientMatchesFiniteDifferencesOnInput) {
  EncoderConfig cfg = tiny_config();
  Model model(cfg, 5);
  Rng rng(9);
  Mat x = random_mat(rng, cfg.ar_order, 3);
  Mat r = random_mat(rng, cfg.embed_dim, 3);

  GraphBuilder g(model.params());
  int xi = g.input(x);
  int h = encoder_forward(g, cfg, xi, Modality::kUltrasonic);
  int l = g.tape().sum_all(g.tape().mul(h, g.tape().leaf(r)));
  g.tape().backward(l);

  Mat fd = oracles::fd_gradient(
      [&](const Mat& v) { return forward_scalar(model, v, r); }, x);
  EXPECT_LT(oracles::grad_rel_error(g.tape().grad(xi), fd), 1e-4);
}

TEST(Encoder, GradientMatchesFiniteDifferencesOnParams) {
  EncoderConfig cfg = tiny_config();
  Model model(cfg, 6);
  Rng rng(10);
  Mat x = random_mat(rng, cfg.ar_order, 3);
  Mat r = random_mat(rng, cfg.embed_dim, 3);

  GraphBuilder g(model.params());
  int xi = g.input(x);
  int h = encoder_forward(g, cfg, xi, Modality::kUltrasonic);
  int l = g.tape().sum_all(g.tape().mul(h, g.tape().leaf(r)));
  g.tape().backward(l);

  // Spot-check parameters from every stage of the stack.
  for (const std::string name :
       {"u.tcn0.w1", "u.tcn2.proj", "u.gru0.f.uh", "u.gru1.b.wx", "u.embed.w"}) {
    if (!model.params().has(name)) continue;
    Mat analytic = g.param_grad(name);
    Mat saved = model.params().get(name);
    Mat fd = oracles::fd_gradient(
        [&](const Mat& v) {
          Model m2(cfg, 6);
          m2.params().tensors() = model.params().tensors();
          m2.params().get(name) = v;
          return forward_scalar(m2, x, r);
        },
        saved);
    EXPECT_LT(oracles::grad_rel_error(analytic, fd), 1e-4) << name;
  }
}

TEST(Encoder, DeterministicPerSeed) {
  EncoderConfig cfg = tiny_config();
  Model a(cfg, 77), b(cfg, 77), c(cfg, 78);
  for (const auto& [name, m] : a.params().tensors()) {
    EXPECT_TRUE(m == b.params().get(name)) << name;
  }
  bool any_diff = false;
  for (const auto& [name, m] : a.params().tensors())
    if (m != c.params().get(name) && m.size() > 0 && m.cwiseAbs().maxCoeff() > 0)
      any_diff = true;
  EXPECT_TRUE(any_diff);

  Rng rng(3);
  Mat x = random_mat(rng, cfg.ar_order, 4);
  GraphBuilder ga(a.params()), gb(b.params());
  int ha = encoder_forward(ga, cfg, ga.input(x), Modality::kUltrasonic);
  int hb = encoder_forward(gb, cfg, gb.input(x), Modality::kUltrasonic);
  EXPECT_TRUE(ga.tape().val(ha) == gb.tape().val(hb));
}

TEST(Encoder, BiGruSwapsStreamsUnderReversalWithTiedWeights) {
  EncoderConfig cfg = tiny_config();
  Model model(cfg, 21);
  // Tie forward and backward weights of the first BiGRU layer.
  for (const char* w : {"wx", "uh", "bias"})
    model.params().get(std::string("u.gru0.b.") + w) =
        model.params().get(std::string("u.gru0.f.") + w);

  Rng rng(4);
  Mat x = random_mat(rng, cfg.channels, 5);

  GraphBuilder g1(model.params());
  int out_fwd = detail::bigru_layer(g1, g1.input(x), "u.gru0", cfg.hidden);
  Mat y = g1.tape().val(out_fwd);

  GraphBuilder g2(model.params());
  int out_rev = detail::bigru_layer(
      g2, g2.input(Mat(x.rowwise().reverse())), "u.gru0", cfg.hidden);
  Mat yr = g2.tape().val(out_rev);

  // Reversing the input swaps the two hidden streams (and reverses time).
  Mat swapped(yr.rows(), yr.cols());
  swapped.topRows(cfg.hidden) = yr.bottomRows(cfg.hidden).rowwise().reverse();
  swapped.bottomRows(cfg.hidden) = yr.topRows(cfg.hidden).rowwise().reverse();
  EXPECT_LT((y - swapped).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Encoder, TcnStackIsCausal) {
  EncoderConfig cfg = tiny_config();
  Model model(cfg, 31);
  Rng rng(8);
  const int t_len = 16;
  Mat x = random_mat(rng, cfg.ar_order, t_len);

  auto run_tcn = [&](const Mat& input) {
    GraphBuilder g(model.params());
    int h = g.input(input);
    int in_dim = cfg.ar_order;
    for (int blk = 0; blk < 3; ++blk) {
      h = detail::tcn_block(g, h, "u.tcn" + std::to_string(blk) + ".",
                            cfg.kernel, cfg.dilations[blk],
                            in_dim != cfg.channels);
      in_dim = cfg.channels;
    }
    return g.tape().val(h);
  };

  Mat base = run_tcn(x);
  for (int s : {5, 10, 15}) {
    Mat perturbed = x;
    perturbed.col(s).array() += 3.0;
    Mat out = run_tcn(perturbed);
    // Outputs strictly before the perturbed window are untouched.
    EXPECT_LT((out.leftCols(s) - base.leftCols(s)).cwiseAbs().maxCoeff(), 1e-12)
        << "perturb " << s;
    EXPECT_GT((out.col(s) - base.col(s)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Project, ContrastiveHeadIsUnitNorm) {
  EncoderConfig cfg = tiny_config();
  Model model(cfg, 41);
  Rng rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    Mat h = random_mat(rng, cfg.embed_dim, 1);
    GraphBuilder g(model.params());
    int p = project(g, cfg, g.input(h), Head::kContrastive, Modality::kWhisper);
    EXPECT_NEAR(g.tape().val(p).norm(), 1.0, 1e-6);
  }
}

TEST(Project, IdentityInitializedHeadNormalizesInput) {
  EncoderConfig cfg = tiny_config();
  Model model(cfg, 42);
  model.params().get("w.proj.w1").setIdentity();
  model.params().get("w.proj.b1").setZero();
  model.params().get("w.proj.w2").setIdentity();
  model.params().get("w.proj.b2").setZero();

  Mat h(cfg.embed_dim, 1);
  h << 0.5, 1.5, 2.0;  // positive, so the hidden ReLU is transparent
  GraphBuilder g(model.params());
  int p = project(g, cfg, g.input(h), Head::kContrastive, Modality::kWhisper);
  Mat expect = h / h.norm();
  EXPECT_LT((g.tape().val(p) - expect).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Project, NanInputThrows) {
  EncoderConfig cfg = tiny_config();
  Model model(cfg, 43);
  Mat h = Mat::Zero(cfg.embed_dim, 1);
  h(0, 0) = std::numeric_limits<double>::quiet_NaN();
  GraphBuilder g(model.params());
  EXPECT_THROW(project(g, cfg, g.input(h), Head::kAuth, Modality::kWhisper),
               ConfigError);
}

TEST(Project, GradientThroughHead) {
  EncoderConfig cfg = tiny_config();
  cfg.embed_dim = 8;  // wide enough that the hidden ReLU never goes fully dead
  Model model(cfg, 44);
  Rng rng(12);
  Mat h = random_mat(rng, cfg.embed_dim, 1);
  Mat r = random_mat(rng, cfg.embed_dim, 1);

  auto scalar = [&](const Mat& v) {
    GraphBuilder g(model.params());
    int p = project(g, cfg, g.input(v), Head::kContrastive, Modality::kUltrasonic);
    return g.tape().val(g.tape().sum_all(g.tape().mul(p, g.tape().leaf(r))))(0, 0);
  };
  GraphBuilder g(model.params());
  int hi = g.input(h);
  int p = project(g, cfg, hi, Head::kContrastive, Modality::kUltrasonic);
  int l = g.tape().sum_all(g.tape().mul(p, g.tape().leaf(r)));
  g.tape().backward(l);
  Mat fd = oracles::fd_gradient(scalar, h);
  EXPECT_LT(oracles::grad_rel_error(g.tape().grad(hi), fd), 1e-4);
}

TEST(ConcatEmbeddings, ValuesAndGradientSplit) {
  EncoderConfig cfg = tiny_config();
  Model model(cfg, 51);
  GraphBuilder g(model.params());
  Mat hw(2, 1), hu(2, 1);
  hw << 1, 2;
  hu << 3, 4;
  int c = concat_embeddings(g, g.input(hw), g.input(hu));
  Mat expect(4, 1);
  expect << 1, 2, 3, 4;
  EXPECT_TRUE(g.tape().val(c) == expect);

  // Mismatched lengths rejected.
  GraphBuilder g2(model.params());
  EXPECT_THROW(
      concat_embeddings(g2, g2.input(Mat::Zero(2, 3)), g2.input(Mat::Zero(2, 2))),
      ConfigError);

  // Gradient splits back to both inputs.
  Rng rng(13);
  Mat a = Mat::Random(3, 4), b = Mat::Random(3, 4), r = Mat::Random(6, 4);
  auto scalar = [&](const Mat& av, const Mat& bv) {
    Tape t;
    int cc = t.concat_rows(t.leaf(av), t.leaf(bv));
    return t.val(t.sum_all(t.mul(cc, t.leaf(r))))(0, 0);
  };
  Tape t;
  int ai = t.leaf(a), bi = t.leaf(b);
  int l = t.sum_all(t.mul(t.concat_rows(ai, bi), t.leaf(r)));
  t.backward(l);
  Mat fa = oracles::fd_gradient([&](const Mat& v) { return scalar(v, b); }, a);
  Mat fb = oracles::fd_gradient([&](const Mat& v) { return scalar(a, v); }, b);
  EXPECT_LT(oracles::grad_rel_error(t.grad(ai), fa), 1e-6);
  EXPECT_LT(oracles::grad_rel_error(t.grad(bi), fb), 1e-6);
}

TEST(SpellLogits, ColumnsAreLogDistributions) {
  EncoderConfig cfg = tiny_config();
  Model model(cfg, 61);
  Rng rng(14);
  Mat c = random_mat(rng, 2 * cfg.embed_dim, 4);
  GraphBuilder g(model.params());
  int logits = spell_logits(g, cfg, g.input(c));
  const Mat& v = g.tape().val(logits);
  ASSERT_EQ(v.rows(), 27);
  ASSERT_EQ(v.cols(), 4);
  for (long j = 0; j < v.cols(); ++j)
    EXPECT_NEAR(v.col(j).array().exp().sum(), 1.0, 1e-6);
}

TEST(SpellLogits, ZeroWeightsGiveUniform) {
  EncoderConfig cfg = tiny_config();
  Model model(cfg, 62);
  model.params().get("spell.w1").setZero();
  model.params().get("spell.b1").setZero();
  model.params().get("spell.w2").setZero();
  model.params().get("spell.b2").setZero();
  GraphBuilder g(model.params());
  int logits = spell_logits(g, cfg, g.input(Mat::Random(2 * cfg.embed_dim, 3)));
  const double expect = -std::log(27.0);
  EXPECT_LT((g.tape().val(logits).array() - expect).abs().maxCoeff(), 1e-12);
}

TEST(SpellLogits, GradientCheck) {
  EncoderConfig cfg = tiny_config();
  Model model(cfg, 63);
  Rng rng(15);
  Mat c = random_mat(rng, 2 * cfg.embed_dim, 3);
  Mat r = random_mat(rng, 27, 3);

  auto scalar = [&](const Mat& v) {
    GraphBuilder g(model.params());
    int logits = spell_logits(g, cfg, g.input(v));
    return g.tape().val(
        g.tape().sum_all(g.tape().mul(logits, g.tape().leaf(r))))(0, 0);
  };
  GraphBuilder g(model.params());
  int ci = g.input(c);
  int logits = spell_logits(g, cfg, ci);
  int l = g.tape().sum_all(g.tape().mul(logits, g.tape().leaf(r)));
  g.tape().backward(l);
  Mat fd = oracles::fd_gradient(scalar, c);
  EXPECT_LT(oracles::grad_rel_error(g.tape().grad(ci), fd), 1e-4);
}

TEST(Checkpoint, RoundTripAndShapeValidation) {
  EncoderConfig cfg = tiny_config();
  Model model(cfg, 71);
  const std::string path = testing::TempDir() + "/ck.ekcp";
  save_checkpoint(model.params(), path);

  Model loaded(cfg, 0);  // different init, same shapes
  load_checkpoint(loaded.params(), path);
  for (const auto& [name, m] : model.params().tensors())
    EXPECT_TRUE(m == loaded.params().get(name)) << name;

  EncoderConfig other = cfg;
  other.embed_dim = cfg.embed_dim + 1;
  Model wrong(other, 0);
  EXPECT_THROW(load_checkpoint(wrong.params(), path), DataError);
}

TEST(Model, ParamCountIsDeterministic) {
  EncoderConfig cfg = tiny_config();
  Model a(cfg, 1), b(cfg, 2);
  EXPECT_EQ(a.params().param_count(), b.params().param_count());
  EXPECT_GT(a.params().param_count(), 0);
  EXPECT_LT(a.params().param_count(), 1000);  // tiny config fits FD budgets
}
