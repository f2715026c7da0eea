#pragma once

#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "earkey/common.hpp"
#include "earkey/dsp/frontend.hpp"

namespace earkey::io {

// Feature file "EKFT" v1: magic, version u16, then per-window records of
// (window_index u32, ar_order f32 AR coefficients, frames_per_window*n_mels
// f32 mel values), all little-endian. Record geometry comes from the
// reader's configuration and is validated against the file size.
inline void write_features(const std::string& path,
                           const std::vector<dsp::FeaturePair>& features) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("features: cannot write " + path);
  os.write("EKFT", 4);
  const uint16_t version = 1;
  os.write(reinterpret_cast<const char*>(&version), 2);
  for (const dsp::FeaturePair& fp : features) {
    const uint32_t idx = static_cast<uint32_t>(fp.window_index);
    os.write(reinterpret_cast<const char*>(&idx), 4);
    for (long i = 0; i < fp.ar.size(); ++i) {
      const float v = static_cast<float>(fp.ar[i]);
      os.write(reinterpret_cast<const char*>(&v), 4);
    }
    for (long r = 0; r < fp.mel.rows(); ++r)
      for (long c = 0; c < fp.mel.cols(); ++c) {
        const float v = static_cast<float>(fp.mel(r, c));
        os.write(reinterpret_cast<const char*>(&v), 4);
      }
  }
  if (!os) throw DataError("features: write failed for " + path);
}

inline std::vector<dsp::FeaturePair> read_features(const std::string& path,
                                                   int ar_order, int n_mels) {
  std::ifstream is(path, std::ios::binary | std::ios::ate);
  if (!is) throw DataError("features: cannot open " + path);
  const std::streamoff size = is.tellg();
  is.seekg(0);

  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "EKFT", 4) != 0)
    throw DataError("features: bad magic in " + path);
  uint16_t version;
  is.read(reinterpret_cast<char*>(&version), 2);
  if (!is || version != 1) throw DataError("features: unsupported version");

  const long record =
      4 + 4L * ar_order + 4L * kFramesPerWindow * n_mels;
  const std::streamoff payload = size - 6;
  if (payload < 0 || payload % record != 0)
    throw DataError("features: size does not match configured geometry: " + path);

  std::vector<dsp::FeaturePair> out;
  const long count = payload / record;
  out.reserve(count);
  for (long w = 0; w < count; ++w) {
    dsp::FeaturePair fp;
    uint32_t idx;
    is.read(reinterpret_cast<char*>(&idx), 4);
    fp.window_index = static_cast<int>(idx);
    fp.ar.resize(ar_order);
    for (int i = 0; i < ar_order; ++i) {
      float v;
      is.read(reinterpret_cast<char*>(&v), 4);
      fp.ar[i] = v;
    }
    fp.mel.resize(kFramesPerWindow, n_mels);
    for (int r = 0; r < kFramesPerWindow; ++r)
      for (int c = 0; c < n_mels; ++c) {
        float v;
        is.read(reinterpret_cast<char*>(&v), 4);
        fp.mel(r, c) = v;
      }
    if (!is) throw DataError("features: truncated record in " + path);
    out.push_back(std::move(fp));
  }
  return out;
}

}  // namespace earkey::io
