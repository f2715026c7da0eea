#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "earkey/dsp/burg.hpp"
#include "earkey/dsp/window_ops.hpp"
#include "earkey/rng.hpp"

using namespace earkey;
using namespace earkey::dsp;

TEST(SliceWindows, Boundaries) {
  EXPECT_EQ(slice_windows(10).size(), 1u);
  EXPECT_EQ(slice_windows(9).size(), 0u);
  auto w14 = slice_windows(14);
  ASSERT_EQ(w14.size(), 3u);
  EXPECT_EQ(w14[0].start, 0);
  EXPECT_EQ(w14[1].start, 2 * 2046);
  EXPECT_EQ(w14[2].start, 4 * 2046);
  for (const auto& w : w14) EXPECT_EQ(w.end - w.start, 10 * 2046);
}

TEST(SliceWindows, CountFormula) {
  for (long f = 0; f < 40; ++f) {
    const long expect = f < 10 ? 0 : (f - 10) / 2 + 1;
    EXPECT_EQ(static_cast<long>(slice_windows(f).size()), expect) << f;
  }
}

TEST(BoostSecondDiff, Annihilations) {
  std::vector<double> constant(50, 3.25);
  for (double v : boost_second_diff(constant)) EXPECT_NEAR(v, 0.0, 1e-12);

  std::vector<double> ramp(50);
  for (int i = 0; i < 50; ++i) ramp[i] = 0.7 * i;
  for (double v : boost_second_diff(ramp)) EXPECT_NEAR(v, 0.0, 1e-12);

  std::vector<double> quad(50);
  for (int i = 0; i < 50; ++i) quad[i] = static_cast<double>(i) * i;
  auto out = boost_second_diff(quad);
  ASSERT_EQ(out.size(), 48u);
  for (double v : out) EXPECT_NEAR(v, 2.0, 1e-12);
}

TEST(BoostSecondDiff, AnnihilatesRandomAffine) {
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const double a = rng.uniform(-10.0, 10.0);
    const double b = rng.uniform(-10.0, 10.0);
    std::vector<double> x(30);
    for (int i = 0; i < 30; ++i) x[i] = a * i + b;
    for (double v : boost_second_diff(x)) EXPECT_NEAR(v, 0.0, 1e-9);
  }
}

TEST(BoostSecondDiff, ShortInputThrows) {
  std::vector<double> x{1.0, 2.0};
  EXPECT_THROW(boost_second_diff(x), ConfigError);
}

namespace {

std::vector<double> synth_ar2(double a1, double a2, long n, Rng& rng) {
  std::vector<double> y(n, 0.0);
  double y1 = 0.0, y2 = 0.0;
  for (long i = 0; i < n; ++i) {
    const double v = a1 * y1 + a2 * y2 + rng.normal();
    y2 = y1;
    y1 = v;
    y[i] = v;
  }
  return y;
}

}  // namespace

TEST(Burg, RecoversKnownAr2) {
  Rng rng(42);
  std::vector<double> y = synth_ar2(1.5, -0.7, 10000, rng);
  BurgResult r = burg(y, 2);
  EXPECT_NEAR(r.ar[0], 1.5, 0.075);   // within 5%
  EXPECT_NEAR(r.ar[1], -0.7, 0.035);  // within 5%
  EXPECT_GE(r.final_error, 0.0);
}

TEST(Burg, WhiteNoiseCoefficientsNearZero) {
  Rng rng(43);
  std::vector<double> y(100000);
  for (double& v : y) v = rng.normal();
  BurgResult r = burg(y, 4);
  for (double c : r.ar) EXPECT_LT(std::abs(c), 0.05);
}

TEST(Burg, StabilityContractOnWindowSizedInput) {
  Rng rng(44);
  std::vector<double> y = synth_ar2(1.2, -0.5, 20460, rng);
  BurgResult r = burg(y, 200);
  ASSERT_EQ(r.ar.size(), 200u);
  for (double c : r.ar) EXPECT_TRUE(std::isfinite(c));
  for (double k : r.reflection) EXPECT_LE(std::abs(k), 1.0 + 1e-12);
  EXPECT_GE(r.final_error, 0.0);
}

TEST(Burg, ReflectionBoundedOnRandomWindows) {
  Rng rng(45);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> y(600);
    // Mix of tones and noise with random scales.
    const double f = rng.uniform(0.01, 3.0);
    const double amp = rng.uniform(0.0, 4.0);
    for (int i = 0; i < 600; ++i)
      y[i] = amp * std::sin(f * i) + rng.normal() * rng.uniform(0.001, 2.0);
    BurgResult r = burg(y, 16);
    for (double k : r.reflection) EXPECT_LE(std::abs(k), 1.0 + 1e-12);
    EXPECT_GE(r.final_error, -1e-15);
  }
}

TEST(Burg, Errors) {
  std::vector<double> shorty(10, 1.0);
  EXPECT_THROW(burg(shorty, 5), ConfigError);
  std::vector<double> zeros(1000, 0.0);
  EXPECT_THROW(burg(zeros, 4), DataError);
}
