#pragma once

#include <cstdint>
#include <random>

namespace ubkde {

/// Counter-style key of a random stream. Replications and sample sizes map to
/// disjoint streams, so parallel scheduling can never change what is drawn.
struct StreamId {
  std::uint64_t master_seed = 0;
  std::int64_t replication = 0;
  std::int64_t n_index = 0;

  friend bool operator==(const StreamId&, const StreamId&) = default;
};

std::uint64_t splitmix64(std::uint64_t x);

class Stream {
 public:
  /// Throws a config error for negative replication or n index.
  explicit Stream(const StreamId& id);

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform on (0, 1).
  double uniform_open();
  /// Standard normal via Box-Muller; always consumes two uniforms.
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace ubkde
