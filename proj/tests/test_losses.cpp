#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "earkey/loss/losses.hpp"
#include "earkey/rng.hpp"
#include "oracles/ctc_bruteforce.hpp"
#include "oracles/fd_check.hpp"

using namespace earkey;
using namespace earkey::loss;

namespace {

Mat random_mat(Rng& rng, long r, long c, double scale = 1.0) {
  Mat m(r, c);
  for (long j = 0; j < c; ++j)
    for (long i = 0; i < r; ++i) m(i, j) = scale * rng.normal();
  return m;
}

Mat random_log_probs(Rng& rng, int k, int t) {
  Mat m = random_mat(rng, k, t, 1.5);
  for (int j = 0; j < t; ++j) {
    const double mx = m.col(j).maxCoeff();
    const double lse = mx + std::log((m.col(j).array() - mx).exp().sum());
    m.col(j).array() -= lse;
  }
  return m;
}

}  // namespace

TEST(Clwum, SinglePairIsZero) {
  Rng rng(1);
  Mat w = random_mat(rng, 6, 1);
  Mat u = random_mat(rng, 6, 1);
  PairLossResult r = clwum_loss(w, u, 0.7);
  EXPECT_NEAR(r.value, 0.0, 1e-12);
}

TEST(Clwum, IdentitySimilarityClosedForm) {
  // Orthonormal embeddings: S = I at N=2. Independent scalar evaluation of
  // the loss formula fixes the expected value.
  Mat w = Mat::Identity(4, 2);
  Mat u = Mat::Identity(4, 2);
  const double tau = 0.7;
  PairLossResult r = clwum_loss(w, u, tau);
  const double expect = -std::log(std::exp(1.0 / tau) / (std::exp(1.0 / tau) + 1.0));
  EXPECT_NEAR(r.value, expect, 1e-12);
  EXPECT_NEAR(r.value, 0.2148, 5e-4);
}

TEST(Clwum, AllIdenticalEmbeddingsGiveLogN) {
  Rng rng(2);
  Mat col = random_mat(rng, 8, 1);
  Mat w = col.replicate(1, 50);
  Mat u = col.replicate(1, 50);
  PairLossResult r = clwum_loss(w, u, 0.7);
  EXPECT_NEAR(r.value, std::log(50.0), 1e-9);
}

TEST(Clwum, BoundsProperty) {
  Rng rng(3);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 1 + static_cast<int>(rng.below(8));
    Mat w = random_mat(rng, 5, n);
    Mat u = random_mat(rng, 5, n);
    PairLossResult r = clwum_loss(w, u, 0.7);
    EXPECT_GE(r.value, -1e-12);
    EXPECT_LE(r.value, std::log(static_cast<double>(n)) + 2.0 / 0.7);
  }
}

TEST(Clwum, GradientMatchesFiniteDifferences) {
  Rng rng(4);
  for (int rep = 0; rep < 5; ++rep) {
    Mat w = random_mat(rng, 4, 3);
    Mat u = random_mat(rng, 4, 3);
    PairLossResult r = clwum_loss(w, u, 0.7);
    Mat fw = oracles::fd_gradient(
        [&](const Mat& v) { return clwum_loss(v, u, 0.7).value; }, w);
    Mat fu = oracles::fd_gradient(
        [&](const Mat& v) { return clwum_loss(w, v, 0.7).value; }, u);
    EXPECT_LT(oracles::grad_rel_error(r.grad_w, fw), 1e-4);
    EXPECT_LT(oracles::grad_rel_error(r.grad_u, fu), 1e-4);
  }
}

TEST(Clwum, Errors) {
  Rng rng(5);
  Mat w = random_mat(rng, 4, 2);
  Mat u = random_mat(rng, 4, 2);
  EXPECT_THROW(clwum_loss(w, u, 0.0), ConfigError);
  EXPECT_THROW(clwum_loss(w, u, -1.0), ConfigError);
  Mat wz = w;
  wz.col(1).setZero();
  EXPECT_THROW(clwum_loss(wz, u, 0.7), DataError);
}

TEST(Triplet, EqualSimilaritiesGiveExactlyMargin) {
  Rng rng(6);
  Mat w = random_mat(rng, 5, 3);
  Mat shared = random_mat(rng, 5, 1);
  Mat u_pos = shared.replicate(1, 3);
  Mat u_neg = shared.replicate(1, 3);
  TripletLossResult r = angular_triplet_loss(w, u_pos, u_neg, 0.2);
  EXPECT_DOUBLE_EQ(r.value, 0.2);
}

TEST(Triplet, PerfectSeparationGivesZero) {
  Mat w(2, 1), u_pos(2, 1), u_neg(2, 1);
  w << 1, 0;
  u_pos << 1, 0;   // theta+ = 0
  u_neg << 0, 1;   // theta- = pi/2
  TripletLossResult r = angular_triplet_loss(w, u_pos, u_neg, 0.2);
  EXPECT_NEAR(r.value, 0.0, 1e-12);
}

TEST(Triplet, KnownAnglesClosedForm) {
  Mat w(2, 1), u_pos(2, 1), u_neg(2, 1);
  w << 1, 0;
  u_pos << std::cos(1.0), std::sin(1.0);
  u_neg << std::cos(0.5), std::sin(0.5);
  TripletLossResult r = angular_triplet_loss(w, u_pos, u_neg, 0.2);
  EXPECT_NEAR(r.value, 0.7, 1e-9);
}

TEST(Triplet, RangeAndScaleInvariance) {
  Rng rng(7);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 1 + static_cast<int>(rng.below(6));
    Mat w = random_mat(rng, 4, n);
    Mat up = random_mat(rng, 4, n);
    Mat un = random_mat(rng, 4, n);
    const double m = 0.2;
    TripletLossResult r = angular_triplet_loss(w, up, un, m);
    EXPECT_GE(r.value, 0.0);
    EXPECT_LE(r.value, m + std::numbers::pi);

    Mat w2 = w, up2 = up, un2 = un;
    for (int j = 0; j < n; ++j) {
      w2.col(j) *= rng.uniform(0.1, 5.0);
      up2.col(j) *= rng.uniform(0.1, 5.0);
      un2.col(j) *= rng.uniform(0.1, 5.0);
    }
    TripletLossResult r2 = angular_triplet_loss(w2, up2, un2, m);
    EXPECT_NEAR(r.value, r2.value, 1e-9);
  }
}

TEST(Triplet, GradientMatchesFiniteDifferences) {
  Rng rng(8);
  for (int rep = 0; rep < 5; ++rep) {
    Mat w = random_mat(rng, 4, 3);
    Mat up = random_mat(rng, 4, 3);
    Mat un = random_mat(rng, 4, 3);
    TripletLossResult r = angular_triplet_loss(w, up, un, 0.2);
    Mat fw = oracles::fd_gradient(
        [&](const Mat& v) { return angular_triplet_loss(v, up, un, 0.2).value; },
        w);
    Mat fp = oracles::fd_gradient(
        [&](const Mat& v) { return angular_triplet_loss(w, v, un, 0.2).value; },
        up);
    Mat fn = oracles::fd_gradient(
        [&](const Mat& v) { return angular_triplet_loss(w, up, v, 0.2).value; },
        un);
    EXPECT_LT(oracles::grad_rel_error(r.grad_w, fw), 1e-4);
    EXPECT_LT(oracles::grad_rel_error(r.grad_u_pos, fp), 1e-4);
    EXPECT_LT(oracles::grad_rel_error(r.grad_u_neg, fn), 1e-4);
  }
}

TEST(Triplet, ZeroNormColumnThrows) {
  Rng rng(9);
  Mat w = random_mat(rng, 4, 2);
  Mat up = random_mat(rng, 4, 2);
  Mat un = random_mat(rng, 4, 2);
  un.col(0).setZero();
  EXPECT_THROW(angular_triplet_loss(w, up, un, 0.2), DataError);
}

TEST(Ctc, OneFrameUniform) {
  Mat lp(2, 1);
  lp << std::log(0.5), std::log(0.5);  // class 0 = letter, class 1 = blank
  CtcResult r = ctc_loss(lp, std::vector<int>{0}, 1);
  EXPECT_TRUE(r.feasible);
  EXPECT_NEAR(r.value, -std::log(0.5), 1e-12);
  EXPECT_NEAR(r.value, oracles::ctc_bruteforce(lp, {0}, 1), 1e-12);
}

TEST(Ctc, TwoFramesUniform) {
  Mat lp(2, 2);
  lp.setConstant(std::log(0.5));
  CtcResult r = ctc_loss(lp, std::vector<int>{0}, 1);
  // Valid paths: (a,a), (a,blank), (blank,a) -> 3 * 0.25.
  EXPECT_NEAR(r.value, -std::log(0.75), 1e-12);
  EXPECT_NEAR(r.value, oracles::ctc_bruteforce(lp, {0}, 1), 1e-12);
}

TEST(Ctc, InfeasibleRepeatFlagsInfinity) {
  Mat lp(2, 2);
  lp.setConstant(std::log(0.5));
  CtcResult r = ctc_loss(lp, std::vector<int>{0, 0}, 1);
  EXPECT_FALSE(r.feasible);
  EXPECT_TRUE(std::isinf(r.value));
  EXPECT_EQ(r.grad.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Ctc, EmptyTargetIsAllBlanks) {
  Mat lp(3, 3);
  lp.setConstant(std::log(1.0 / 3.0));
  CtcResult r = ctc_loss(lp, std::vector<int>{}, 2);
  EXPECT_NEAR(r.value, -3.0 * std::log(1.0 / 3.0), 1e-12);
  EXPECT_NEAR(r.value, oracles::ctc_bruteforce(lp, {}, 2), 1e-12);
}

TEST(Ctc, GradientMatchesFiniteDifferences) {
  Rng rng(10);
  for (int rep = 0; rep < 5; ++rep) {
    Mat lp = random_log_probs(rng, 3, 5);
    std::vector<int> target{0, 1};
    CtcResult r = ctc_loss(lp, target, 2);
    Mat fd = oracles::fd_gradient(
        [&](const Mat& v) { return ctc_loss(v, target, 2).value; }, lp);
    EXPECT_LT(oracles::grad_rel_error(r.grad, fd), 1e-4);
  }
}

TEST(Ctc, LetterStringFrontEnd) {
  Rng rng(11);
  Mat lp = random_log_probs(rng, 27, 9);
  CtcResult r = ctc_loss(lp, std::string("ab"));
  EXPECT_TRUE(r.feasible);
  EXPECT_TRUE(std::isfinite(r.value));
  EXPECT_THROW(ctc_loss(lp, std::string("a!")), ConfigError);
}

TEST(TotalLoss, PaperWeightsAndProperties) {
  LossWeights w;
  EXPECT_DOUBLE_EQ(total_loss(1.0, 1.0, 1.0, w), 0.9);
  EXPECT_DOUBLE_EQ(total_loss(0.0, 0.0, 0.0, w), 0.0);
  Rng rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    const double a = rng.normal(), b = rng.normal(), c = rng.normal();
    EXPECT_NEAR(total_loss(2 * a, 2 * b, 2 * c, w), 2 * total_loss(a, b, c, w),
                1e-12);
  }
}

TEST(TotalLoss, NodeFormMatchesScalarForm) {
  Tape t;
  int a = t.leaf(Mat::Constant(1, 1, 0.3));
  int b = t.leaf(Mat::Constant(1, 1, 1.7));
  int c = t.leaf(Mat::Constant(1, 1, 0.9));
  LossWeights w;
  int total = total_node(t, a, b, c, w);
  EXPECT_NEAR(t.val(total)(0, 0), total_loss(0.3, 1.7, 0.9, w), 1e-15);
  t.backward(total);
  EXPECT_NEAR(t.grad(a)(0, 0), w.alpha, 1e-15);
  EXPECT_NEAR(t.grad(b)(0, 0), w.beta, 1e-15);
  EXPECT_NEAR(t.grad(c)(0, 0), w.gamma, 1e-15);
}
