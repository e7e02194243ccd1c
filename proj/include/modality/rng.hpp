#pragma once

#include <cstdint>
#include <random>

namespace modality {

//! Seedable random stream. Substreams are derived from (seed, stream id)
//! so that bootstrap replicates can be generated independently of
//! scheduling order: replicate b always sees the stream (seed, b).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(mix_(seed, 0x6d6f64616c697479ull)) {}

  static RngStream substream(std::uint64_t seed, std::uint64_t stream_id) {
    RngStream s(0);
    s.engine_.seed(mix_(seed, 0x9e3779b97f4a7c15ull + stream_id));
    return s;
  }

  //! Derives a fresh seed for a nested family of substreams.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) { return mix_(seed, tag); }

  double uniform() { return unif_(engine_); }             // [0,1)
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  double normal() { return norm_(engine_); }              // N(0,1)
  std::size_t uniform_index(std::size_t n) {
    std::uniform_int_distribution<std::size_t> d(0, n - 1);
    return d(engine_);
  }
  std::uint64_t next_u64() { return engine_(); }

 private:
  // splitmix64 finalizer over the combined words
  static std::uint64_t mix_(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> norm_{0.0, 1.0};
};

}  // namespace modality
