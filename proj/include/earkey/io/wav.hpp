#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "earkey/common.hpp"

namespace earkey::io {

// Mono PCM16 little-endian WAV. The only container the pipeline speaks.

inline void write_wav(const std::string& path, const std::vector<double>& samples,
                      int sample_rate = kSampleRate) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("wav: cannot write " + path);
  auto put_u32 = [&os](uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); };
  auto put_u16 = [&os](uint16_t v) { os.write(reinterpret_cast<const char*>(&v), 2); };

  const uint32_t data_bytes = static_cast<uint32_t>(samples.size() * 2);
  os.write("RIFF", 4);
  put_u32(36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  put_u32(16);
  put_u16(1);  // PCM
  put_u16(1);  // mono
  put_u32(static_cast<uint32_t>(sample_rate));
  put_u32(static_cast<uint32_t>(sample_rate) * 2);
  put_u16(2);   // block align
  put_u16(16);  // bits
  os.write("data", 4);
  put_u32(data_bytes);
  for (double s : samples) {
    const double clamped = std::clamp(s, -1.0, 1.0);
    const int16_t q = static_cast<int16_t>(std::lround(clamped * 32767.0));
    os.write(reinterpret_cast<const char*>(&q), 2);
  }
  if (!os) throw DataError("wav: write failed for " + path);
}

struct WavData {
  std::vector<double> samples;
  int sample_rate = 0;
};

inline WavData read_wav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("wav: cannot open " + path);
  auto get_u32 = [&is] {
    uint32_t v;
    is.read(reinterpret_cast<char*>(&v), 4);
    if (!is) throw DataError("wav: truncated header");
    return v;
  };
  auto get_u16 = [&is] {
    uint16_t v;
    is.read(reinterpret_cast<char*>(&v), 2);
    if (!is) throw DataError("wav: truncated header");
    return v;
  };

  char tag[4];
  is.read(tag, 4);
  if (!is || std::memcmp(tag, "RIFF", 4) != 0) throw DataError("wav: not RIFF");
  get_u32();
  is.read(tag, 4);
  if (!is || std::memcmp(tag, "WAVE", 4) != 0) throw DataError("wav: not WAVE");

  WavData out;
  bool have_fmt = false;
  while (is.read(tag, 4)) {
    const uint32_t chunk = get_u32();
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      const uint16_t fmt = get_u16();
      const uint16_t channels = get_u16();
      out.sample_rate = static_cast<int>(get_u32());
      get_u32();
      get_u16();
      const uint16_t bits = get_u16();
      if (fmt != 1 || channels != 1 || bits != 16)
        throw DataError("wav: need mono PCM16: " + path);
      if (chunk > 16) is.seekg(chunk - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw DataError("wav: data before fmt");
      out.samples.resize(chunk / 2);
      for (auto& s : out.samples) {
        int16_t q;
        is.read(reinterpret_cast<char*>(&q), 2);
        if (!is) throw DataError("wav: truncated data");
        s = static_cast<double>(q) / 32767.0;
      }
      return out;
    } else {
      is.seekg(chunk + (chunk & 1), std::ios::cur);
    }
  }
  throw DataError("wav: no data chunk in " + path);
}

}  // namespace earkey::io
