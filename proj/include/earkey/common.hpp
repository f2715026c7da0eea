#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace earkey {

// Bad configuration or violated call contract. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unusable input data (absent probe, silent capture, corrupt file).
// CLI maps this to exit code 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

constexpr int kSampleRate = 48000;     // capture rate, Hz
constexpr int kSymbolLen = 2046;       // probe symbol length in samples
constexpr int kWhisperRate = 24000;    // whisper stream rate after decimation
constexpr int kFramesPerWindow = 10;   // 10 symbols per analysis window
constexpr int kWindowStrideFrames = 2; // window hop in symbols
constexpr int kNumClasses = 27;        // a..z plus blank
constexpr int kBlank = 26;             // blank is the last class

inline char class_to_letter(int c) { return static_cast<char>('a' + c); }
inline int letter_to_class(char c) {
  if (c < 'a' || c > 'z') throw ConfigError(std::string("not a letter: ") + c);
  return c - 'a';
}

}  // namespace earkey
