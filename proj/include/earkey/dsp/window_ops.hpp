#pragma once

#include <span>
#include <vector>

#include "earkey/common.hpp"

namespace earkey::dsp {

struct WindowSpan {
  int index = 0;
  long start = 0;  // sample offsets at 48 kHz, [start, end)
  long end = 0;
};

// 10-frame windows with a 2-frame stride over a symbol-aligned capture.
// Trailing partial windows are dropped.
inline std::vector<WindowSpan> slice_windows(long num_symbols,
                                             int frames_per_window = kFramesPerWindow,
                                             int stride_frames = kWindowStrideFrames,
                                             int symbol_len = kSymbolLen) {
  std::vector<WindowSpan> spans;
  if (num_symbols < frames_per_window) return spans;
  const long count = (num_symbols - frames_per_window) / stride_frames + 1;
  spans.reserve(count);
  for (long w = 0; w < count; ++w) {
    WindowSpan s;
    s.index = static_cast<int>(w);
    s.start = w * stride_frames * static_cast<long>(symbol_len);
    s.end = s.start + frames_per_window * static_cast<long>(symbol_len);
    spans.push_back(s);
  }
  return spans;
}

// y[n] = x[n] - 2 x[n-1] + x[n-2]; annihilates affine trends and lifts the
// upper band where earbud transducers roll off.
inline std::vector<double> boost_second_diff(std::span<const double> x) {
  if (x.size() < 3)
    throw ConfigError("boost_second_diff: need at least 3 samples");
  std::vector<double> y(x.size() - 2);
  for (size_t n = 2; n < x.size(); ++n)
    y[n - 2] = x[n] - 2.0 * x[n - 1] + x[n - 2];
  return y;
}

}  // namespace earkey::dsp
