#include "ubkde/rng.hpp"

#include <cmath>
#include <numbers>

#include "ubkde/error.hpp"

namespace ubkde {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t stream_seed(const StreamId& id) {
  if (id.replication < 0 || id.n_index < 0) {
    throw Error(ErrorKind::config, "unknown stream id: negative index");
  }
  std::uint64_t h = splitmix64(id.master_seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(id.replication));
  h = splitmix64(h ^ (static_cast<std::uint64_t>(id.n_index) << 32));
  return h;
}

}  // namespace

Stream::Stream(const StreamId& id) : engine_(stream_seed(id)) {}

double Stream::uniform_open() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Stream::normal() {
  const double u1 = uniform_open();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace ubkde
