#include <gtest/gtest.h>

#include <cmath>

#include "earkey/decode/ctc_decode.hpp"
#include "earkey/decode/lexicon.hpp"
#include "earkey/rng.hpp"
#include "oracles/ctc_bruteforce.hpp"

using namespace earkey;
using namespace earkey::decode;

namespace {

// Columns putting almost all mass on the requested class sequence.
Mat path_log_probs(const std::vector<int>& path, int k) {
  Mat lp(k, path.size());
  lp.setConstant(std::log(0.01 / (k - 1)));
  for (size_t t = 0; t < path.size(); ++t) lp(path[t], t) = std::log(0.99);
  return lp;
}

Mat random_log_probs(Rng& rng, int k, int t) {
  Mat m(k, t);
  for (int j = 0; j < t; ++j) {
    for (int i = 0; i < k; ++i) m(i, j) = 1.2 * rng.normal();
    const double mx = m.col(j).maxCoeff();
    m.col(j).array() -= mx + std::log((m.col(j).array() - mx).exp().sum());
  }
  return m;
}

// Exhaustive maximum-posterior labeling through the brute-force path oracle.
std::string oracle_best_label(const Mat& lp, int blank) {
  const int k = static_cast<int>(lp.rows());
  std::string best;
  double best_lp = -1e300;
  for (const auto& target :
       oracles::all_label_sequences(k, blank, static_cast<int>(lp.cols()))) {
    const double v = oracles::ctc_bruteforce(lp, target, blank);
    if (std::isinf(v)) continue;
    std::string letters;
    for (int c : target) letters.push_back(static_cast<char>('a' + c));
    if (-v > best_lp || (-v == best_lp && letters < best)) {
      best_lp = -v;
      best = letters;
    }
  }
  return best;
}

}  // namespace

TEST(GreedyDecode, CollapseRules) {
  // Classes: a=0, b=1, blank=2.
  EXPECT_EQ(greedy_decode(path_log_probs({0, 0, 2, 1, 1}, 3)), "ab");
  EXPECT_EQ(greedy_decode(path_log_probs({2, 2, 2}, 3)), "");
  EXPECT_EQ(greedy_decode(path_log_probs({0, 2, 0}, 3)), "aa");
}

TEST(GreedyDecode, MatchesCollapseOracleOnRandomPaths) {
  Rng rng(1);
  for (int rep = 0; rep < 200; ++rep) {
    const int t = 1 + static_cast<int>(rng.below(8));
    std::vector<int> path(t);
    for (int& c : path) c = static_cast<int>(rng.below(3));
    std::string expect;
    for (int c : oracles::collapse_path(path, 2))
      expect.push_back(static_cast<char>('a' + c));
    EXPECT_EQ(greedy_decode(path_log_probs(path, 3)), expect);
  }
}

TEST(BeamDecode, AllMassOnBlank) {
  Mat lp(3, 4);
  lp.setConstant(std::log(1e-9));
  lp.row(2).setConstant(std::log(1.0 - 2e-9));
  auto hyps = beam_decode(lp, 8, 3);
  ASSERT_GE(hyps.size(), 1u);
  EXPECT_EQ(hyps[0].letters, "");
  EXPECT_EQ(hyps[0].rank, 1);
}

TEST(BeamDecode, ExhaustiveWidthMatchesBruteForceTop1) {
  Rng rng(2);
  for (int rep = 0; rep < 30; ++rep) {
    const int t = 1 + static_cast<int>(rng.below(4));
    Mat lp = random_log_probs(rng, 3, t);
    const int width = 256;  // >= 3^4, exhaustive for these sizes
    auto hyps = beam_decode(lp, width, 1);
    ASSERT_FALSE(hyps.empty());
    EXPECT_EQ(hyps[0].letters, oracle_best_label(lp, 2)) << "t=" << t;
  }
}

TEST(BeamDecode, WideningNeverLowersTop1Posterior) {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    Mat lp = random_log_probs(rng, 3, 5);
    double prev = -1e300;
    for (int width : {1, 2, 4, 8, 16, 64}) {
      auto hyps = beam_decode(lp, width, 1);
      ASSERT_FALSE(hyps.empty());
      EXPECT_GE(hyps[0].log_prob, prev - 1e-12);
      prev = hyps[0].log_prob;
    }
  }
}

TEST(BeamDecode, ResultInvariants) {
  Rng rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    Mat lp = random_log_probs(rng, 4, 6);
    auto hyps = beam_decode(lp, 8, 8);
    EXPECT_LE(hyps.size(), 8u);
    for (size_t i = 0; i < hyps.size(); ++i) {
      EXPECT_EQ(hyps[i].rank, static_cast<int>(i) + 1);
      EXPECT_LE(hyps[i].log_prob, 1e-12);  // posteriors never exceed 1
      if (i > 0) {
        EXPECT_GE(hyps[i - 1].log_prob, hyps[i].log_prob);
        for (size_t j = 0; j < i; ++j)
          EXPECT_NE(hyps[i].letters, hyps[j].letters);
      }
    }
  }
}

TEST(BeamDecode, Errors) {
  Mat lp = Mat::Constant(3, 2, std::log(1.0 / 3.0));
  EXPECT_THROW(beam_decode(lp, 0, 1), ConfigError);
  EXPECT_THROW(beam_decode(lp, 4, 0), ConfigError);
  EXPECT_THROW(beam_decode(lp, 4, 5), ConfigError);
}

TEST(Lexicon, Validation) {
  EXPECT_THROW(Lexicon::from_words({}), ConfigError);
  EXPECT_THROW(Lexicon::from_words({"ear", "ear"}), ConfigError);
  EXPECT_THROW(Lexicon::from_words({"Ear"}), ConfigError);
  Lexicon lex = Lexicon::from_words({"ear", "tea"});
  EXPECT_EQ(lex.words.size(), 2u);
}

TEST(Lexicon, ExactMatchRanksFirst) {
  Lexicon lex = Lexicon::from_words({"tea", "ear", "art"});
  std::vector<Hypothesis> hyps{{"ear", -0.1, 1}};
  auto top = lexicon_topn(hyps, lex, 3);
  ASSERT_EQ(top.size(), 3u);
  EXPECT_EQ(top[0].word, "ear");
  EXPECT_EQ(top[0].distance, 0);
}

TEST(Lexicon, EditDistanceOrdering) {
  Lexicon lex = Lexicon::from_words({"ear", "tea"});
  std::vector<Hypothesis> hyps{{"eat", -0.2, 1}};
  // Oracle: classic DP distances.
  EXPECT_EQ(levenshtein("eat", "ear"), 1);
  EXPECT_EQ(levenshtein("eat", "tea"), 2);
  auto top = lexicon_topn(hyps, lex, 2);
  EXPECT_EQ(top[0].word, "ear");
  EXPECT_EQ(top[1].word, "tea");
}

TEST(Lexicon, EmptyDecodeRanksByWordLength) {
  Lexicon lex = Lexicon::from_words({"a", "abcd", "ab"});
  std::vector<Hypothesis> hyps{{"", -0.5, 1}};
  auto top = lexicon_topn(hyps, lex, 3);
  EXPECT_EQ(top[0].word, "a");
  EXPECT_EQ(top[1].word, "ab");
  EXPECT_EQ(top[2].word, "abcd");
  EXPECT_EQ(top[2].distance, 4);
}

TEST(Lexicon, DeterministicTotalOrder) {
  Lexicon lex = Lexicon::from_words({"ab", "ba", "aa"});
  std::vector<Hypothesis> hyps{{"ab", -0.3, 1}, {"ba", -0.3, 2}};
  auto a = lexicon_topn(hyps, lex, 3);
  auto b = lexicon_topn(hyps, lex, 3);
  for (size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].word, b[i].word);
  EXPECT_THROW(lexicon_topn(hyps, lex, 0), ConfigError);
}
