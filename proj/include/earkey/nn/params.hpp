#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "earkey/common.hpp"
#include "earkey/rng.hpp"

namespace earkey::nn {

// Named parameter tensors. Initialization draws from a per-name stream of the
// model seed, so layout changes never reshuffle unrelated weights.
class ParamStore {
 public:
  explicit ParamStore(uint64_t seed = 0) : seed_(seed) {}

  uint64_t seed() const { return seed_; }

  // He-style uniform fan-in init; biases (cols == 1 with zero_init) are zero.
  Eigen::MatrixXd& add(const std::string& name, long rows, long cols,
                       bool zero_init = false) {
    if (tensors_.count(name)) throw ConfigError("ParamStore: duplicate " + name);
    Eigen::MatrixXd m(rows, cols);
    if (zero_init) {
      m.setZero();
    } else {
      Rng rng = Rng(seed_).fork(name);
      const double limit = std::sqrt(6.0 / static_cast<double>(cols));
      for (long j = 0; j < cols; ++j)
        for (long i = 0; i < rows; ++i) m(i, j) = rng.uniform(-limit, limit);
    }
    return tensors_.emplace(name, std::move(m)).first->second;
  }

  bool has(const std::string& name) const { return tensors_.count(name) > 0; }

  Eigen::MatrixXd& get(const std::string& name) {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw ConfigError("ParamStore: missing " + name);
    return it->second;
  }
  const Eigen::MatrixXd& get(const std::string& name) const {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw ConfigError("ParamStore: missing " + name);
    return it->second;
  }

  const std::map<std::string, Eigen::MatrixXd>& tensors() const {
    return tensors_;
  }
  std::map<std::string, Eigen::MatrixXd>& tensors() { return tensors_; }

  long param_count() const {
    long n = 0;
    for (const auto& [_, m] : tensors_) n += m.size();
    return n;
  }

 private:
  uint64_t seed_;
  std::map<std::string, Eigen::MatrixXd> tensors_;  // ordered: stable layout
};

namespace detail {

template <typename T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw DataError("checkpoint: truncated file");
  return v;
}

}  // namespace detail

// Checkpoint format: magic "EKCP", version u16, tensor count u32, manifest of
// (name, rows u32, cols u32, byte offset u64), then little-endian f64
// payloads. Loading validates every declared shape.
inline void save_checkpoint(const ParamStore& store, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("checkpoint: cannot write " + path);
  os.write("EKCP", 4);
  detail::write_pod<uint16_t>(os, 1);
  detail::write_pod<uint32_t>(os, static_cast<uint32_t>(store.tensors().size()));

  uint64_t offset = 0;
  for (const auto& [name, m] : store.tensors()) {
    detail::write_pod<uint16_t>(os, static_cast<uint16_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    detail::write_pod<uint32_t>(os, static_cast<uint32_t>(m.rows()));
    detail::write_pod<uint32_t>(os, static_cast<uint32_t>(m.cols()));
    detail::write_pod<uint64_t>(os, offset);
    offset += static_cast<uint64_t>(m.size()) * sizeof(double);
  }
  for (const auto& [name, m] : store.tensors())
    os.write(reinterpret_cast<const char*>(m.data()),
             static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!os) throw DataError("checkpoint: write failed for " + path);
}

inline void load_checkpoint(ParamStore& store, const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("checkpoint: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "EKCP", 4) != 0)
    throw DataError("checkpoint: bad magic");
  const uint16_t version = detail::read_pod<uint16_t>(is);
  if (version != 1) throw DataError("checkpoint: unsupported version");
  const uint32_t count = detail::read_pod<uint32_t>(is);

  struct Entry {
    std::string name;
    uint32_t rows, cols;
    uint64_t offset;
  };
  std::vector<Entry> entries;
  for (uint32_t i = 0; i < count; ++i) {
    const uint16_t len = detail::read_pod<uint16_t>(is);
    std::string name(len, '\0');
    is.read(name.data(), len);
    Entry e;
    e.name = name;
    e.rows = detail::read_pod<uint32_t>(is);
    e.cols = detail::read_pod<uint32_t>(is);
    e.offset = detail::read_pod<uint64_t>(is);
    entries.push_back(std::move(e));
  }
  const std::streampos payload_start = is.tellg();
  for (const Entry& e : entries) {
    Eigen::MatrixXd& m = store.get(e.name);
    if (m.rows() != static_cast<long>(e.rows) ||
        m.cols() != static_cast<long>(e.cols))
      throw DataError("checkpoint: shape mismatch for " + e.name);
    is.seekg(payload_start + static_cast<std::streamoff>(e.offset));
    is.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!is) throw DataError("checkpoint: truncated payload for " + e.name);
  }
}

}  // namespace earkey::nn
