#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "earkey/dsp/dft.hpp"
#include "earkey/dsp/filters.hpp"

using namespace earkey;
using namespace earkey::dsp;

namespace {

// Filter response oracle: DFT of the impulse response of the zero-phase
// cascade, evaluated at the probe frequency.
double zero_phase_gain_db(const std::vector<Biquad>& sections, double f_hz,
                          double fs, int n = 1 << 14) {
  std::vector<double> impulse(n, 0.0);
  impulse[n / 2] = 1.0;
  std::vector<double> h = filtfilt(sections, impulse);
  const int k = static_cast<int>(std::round(f_hz / fs * n));
  const auto x = dft_bin(h, k);
  return 20.0 * std::log10(std::abs(x) + 1e-300);
}

}  // namespace

TEST(Filters, HighpassResponse) {
  auto hp = butterworth(8, 17500.0, 48000.0, FilterKind::kHighpass);
  EXPECT_LE(zero_phase_gain_db(hp, 5000.0, 48000.0), -60.0);
  EXPECT_GE(zero_phase_gain_db(hp, 20000.0, 48000.0), -1.0);
  EXPECT_LE(zero_phase_gain_db(hp, 20000.0, 48000.0), 0.01);
}

TEST(Filters, LowpassResponse) {
  auto lp = butterworth(8, 12000.0, 48000.0, FilterKind::kLowpass);
  EXPECT_GE(zero_phase_gain_db(lp, 1000.0, 48000.0), -0.1);
  EXPECT_LE(zero_phase_gain_db(lp, 16000.0, 48000.0), -60.0);
}

TEST(Filters, ToneAmplitudes) {
  const int n = 48000;
  std::vector<double> tone20k(n), tone5k(n);
  for (int i = 0; i < n; ++i) {
    tone20k[i] = std::sin(kTwoPi * 20000.0 * i / 48000.0);
    tone5k[i] = std::sin(kTwoPi * 5000.0 * i / 48000.0);
  }
  std::vector<double> out20 = isolate_ultrasonic(tone20k);
  std::vector<double> out5 = isolate_ultrasonic(tone5k);
  // Measure away from the edges.
  double amp20 = 0.0, amp5 = 0.0;
  for (int i = n / 4; i < 3 * n / 4; ++i) {
    amp20 = std::max(amp20, std::abs(out20[i]));
    amp5 = std::max(amp5, std::abs(out5[i]));
  }
  EXPECT_GE(20.0 * std::log10(amp20), -1.0);   // preserved within 1 dB
  EXPECT_LE(20.0 * std::log10(amp5), -60.0);   // rejected
}

TEST(Filters, ZeroInZeroOut) {
  std::vector<double> zeros(4096, 0.0);
  std::vector<double> out = isolate_ultrasonic(zeros);
  ASSERT_EQ(out.size(), zeros.size());
  for (double v : out) EXPECT_EQ(v, 0.0);
}

TEST(Filters, OutputLengthMatchesInput) {
  std::vector<double> x(5000);
  for (size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.9 * i);
  EXPECT_EQ(isolate_ultrasonic(x).size(), x.size());
  EXPECT_EQ(lowpass_whisper(x).size(), x.size());
}

TEST(Filters, ShortInputThrows) {
  std::vector<double> x(10, 1.0);
  EXPECT_THROW(isolate_ultrasonic(x), ConfigError);
}

TEST(Filters, ZeroPhase) {
  // A band-limited pulse must keep its center of mass after filtering.
  const int n = 8192;
  std::vector<double> x(n, 0.0);
  for (int i = 0; i < 400; ++i)
    x[n / 2 - 200 + i] =
        std::sin(kTwoPi * 20000.0 * i / 48000.0) * std::exp(-std::pow((i - 200.0) / 80.0, 2));
  auto hp = butterworth(8, 17500.0, 48000.0, FilterKind::kHighpass);
  std::vector<double> y = filtfilt(hp, x);
  double cx = 0, ex = 0, cy = 0, ey = 0;
  for (int i = 0; i < n; ++i) {
    cx += i * x[i] * x[i];
    ex += x[i] * x[i];
    cy += i * y[i] * y[i];
    ey += y[i] * y[i];
  }
  EXPECT_NEAR(cx / ex, cy / ey, 0.05);
}

TEST(Filters, DecimateBy2) {
  std::vector<double> x{0, 1, 2, 3, 4, 5, 6};
  std::vector<double> d = decimate_by_2(x);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d[0], 0);
  EXPECT_EQ(d[1], 2);
  EXPECT_EQ(d[2], 4);
}
