#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace earkey {

// Deterministic splitmix64 stream. Used everywhere a seed appears so that
// results are bit-identical across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Integer in [0, n).
  uint64_t below(uint64_t n) { return next_u64() % n; }

  // Standard normal via Box-Muller; one draw per call, cached pair unused to
  // keep the stream position a pure function of call count.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // Child stream derived from this seed and a label; advancing the child does
  // not disturb the parent.
  Rng fork(std::string_view tag, uint64_t salt = 0) const {
    uint64_t h = state_ ^ 0x243f6a8885a308d3ULL;
    for (char c : tag) {
      h ^= static_cast<uint8_t>(c);
      h *= 0x100000001b3ULL;
    }
    h ^= salt + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    Rng child(h);
    child.next_u64();
    return child;
  }

 private:
  uint64_t state_;
};

}  // namespace earkey
